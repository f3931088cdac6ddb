//! Standalone matplotlib scripts that read a preset's CSV files from their
//! own directory.

use crate::Preset;

const PRELUDE: &str = r##"import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

HERE = os.path.dirname(os.path.abspath(sys.argv[0]))


def load(name):
    text = {"n_bits": str, "n_adc": str, "n_dac": str}
    return pd.read_csv(os.path.join(HERE, name), comment="#", dtype=text)


def save(fig, name):
    path = os.path.join(HERE, name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    print("wrote", path)

"##;

const POWER: &str = r##"
df = load("power_table.csv")
fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
parts = ["rffe_mw", "gain_stage_mw", "converter_mw"]
for ax, chain in zip(axes, ["rx", "tx"]):
    d = df[df.chain == chain].set_index("architecture")
    d[parts].plot.bar(stacked=True, ax=ax, legend=ax is axes[0])
    ax.set_title(chain.upper())
    ax.set_ylabel("power [mW]")
save(fig, "power_table.png")
"##;

const AQNM: &str = r##"
orth = load("aqnm_orthogonal.csv")
sdma = load("aqnm_sdma.csv")
fig, axes = plt.subplots(1, 2, figsize=(11, 4))
for n, d in orth.groupby("n_bits", sort=False):
    axes[0].plot(d.snr_db, d.sinr_db, label=f"n = {n}")
axes[0].set_xlabel("SNR [dB]")
axes[0].set_ylabel("SINR [dB]")
axes[0].legend()
for (g0, n), d in sdma.groupby(["gamma0_db", "n_bits"], sort=False):
    axes[1].plot(d.sir_db, d.sinr_db, label=f"gamma0 = {g0} dB, n = {n}")
axes[1].set_xlabel("SIR [dB]")
axes[1].set_ylabel("SINR [dB]")
axes[1].legend(fontsize=7)
save(fig, "aqnm_curves.png")
"##;

const LINK: &str = r##"
df = load("link_validate.csv")
fig, ax = plt.subplots(figsize=(6, 4))
for n, d in df.groupby("n_adc", sort=False):
    line, = ax.plot(d.snr_db, d.simulated_db, "o", label=f"n = {n} simulated")
    ax.plot(d.snr_db, d.predicted_db, "-", color=line.get_color())
ax.set_xlabel("input SNR [dB]")
ax.set_ylabel("post-equalization SNR [dB]")
ax.legend(fontsize=7)
save(fig, "link_validate.png")
"##;

const SDMA_LINK: &str = r##"
df = load("sdma_link.csv")
fig, ax = plt.subplots(figsize=(6, 4))
for (g0, n), d in df.groupby(["gamma0_db", "n_adc"], sort=False):
    line, = ax.plot(d.sir_db, d.simulated_db, "o", label=f"gamma0 = {g0} dB, n = {n}")
    ax.plot(d.sir_db, d.predicted_db, "-", color=line.get_color())
ax.set_xlabel("SIR [dB]")
ax.set_ylabel("post-equalization SINR [dB]")
ax.legend(fontsize=7)
save(fig, "sdma_link.png")
"##;

const CELL: &str = r##"
df = load(f"{STEM}_cdf.csv")
fig, axes = plt.subplots(1, 2, figsize=(11, 4))
for (s, n), d in df.groupby(["scheduler", "n_bits"], sort=False):
    lab = f"{s}, n = {n}"
    axes[0].plot(d.sinr_db, d.percentile / 100, label=lab)
    axes[1].plot(d.rate_bps / 1e6, d.percentile / 100, label=lab)
axes[0].set_xlabel("SINR [dB]")
axes[1].set_xlabel("rate [Mbps]")
axes[1].set_xscale("log")
for ax in axes:
    ax.set_ylabel("CDF")
    ax.legend(fontsize=7)
save(fig, f"{STEM}.png")
"##;

const TX_PSD: &str = r##"
df = load("tx_psd.csv")
fig, ax = plt.subplots(figsize=(7, 4))
for (n, o), d in df.groupby(["n_bits", "lpf_order"], sort=False):
    ax.plot(d.freq_hz / 1e6, d.psd_dbm_per_hz, lw=0.8, label=f"n = {n}, order {o}")
ax.set_xlabel("frequency [MHz]")
ax.set_ylabel("PSD [dBm/Hz]")
ax.legend(fontsize=7)
save(fig, "tx_psd.png")
"##;

const ACLR: &str = r##"
df = load("aclr_sweep.csv")
fig, ax = plt.subplots(figsize=(6, 4))
cols = [c for c in df.columns if c.startswith("aclr")]
df["x"] = df.n_bits.astype(str)
for o, d in df.groupby("lpf_order"):
    for c in cols:
        ax.plot(d.x, d[c], marker="o", label=f"order {o}, {c}")
ax.axhline(28, color="k", ls="--", lw=0.8)
ax.set_xlabel("DAC bits")
ax.set_ylabel("ACLR [dB]")
ax.legend(fontsize=6)
save(fig, "aclr_sweep.png")
"##;

const EVM: &str = r##"
df = load("evm_sweep.csv")
df = df[df.rf_snr_db.astype(str) != "inf"].copy()
df["rf_snr_db"] = df.rf_snr_db.astype(float)
fig, ax = plt.subplots(figsize=(6, 4))
for n, d in df.groupby("n_bits", sort=False):
    line, = ax.plot(d.rf_snr_db, d.evm_pct, "o", label=f"n = {n}")
    ax.plot(d.rf_snr_db, d.predicted_pct, "-", color=line.get_color())
for lim in (8.0, 3.5):
    ax.axhline(lim, color="k", ls="--", lw=0.8)
ax.set_yscale("log")
ax.set_xlabel("1/sigma_RF^2 [dB]")
ax.set_ylabel("EVM [%]")
ax.legend()
save(fig, "evm_sweep.png")
"##;

/// Plot script for `preset`.
pub fn script(preset: Preset) -> String {
    let body = match preset {
        Preset::PowerTable => POWER.to_string(),
        Preset::AqnmCurves => AQNM.to_string(),
        Preset::LinkValidate => LINK.to_string(),
        Preset::SdmaLink => SDMA_LINK.to_string(),
        Preset::CellOfdma => format!("\nSTEM = \"cell_ofdma\"\n{CELL}"),
        Preset::CellSdma => format!("\nSTEM = \"cell_sdma\"\n{CELL}"),
        Preset::TxPsd => TX_PSD.to_string(),
        Preset::AclrSweep => ACLR.to_string(),
        Preset::EvmSweep => EVM.to_string(),
    };
    format!("{PRELUDE}{body}")
}
