"""Synthetic handheld-receiver sweep for exercising the calibration chain.

The reference body is re-run with a body-to-earth capacitance of 150 pF, the
model gain is added to a -5 dBm transmit setpoint, and 0.1 dB of Gaussian
noise (fixed seed) stands in for receiver jitter. Fitting C_B back from this
file should land close to 150 pF.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from brhbc.calibration import SweepRecord, dump_sweep, model_gain_db
from brhbc.scenario import bundled_config, load_scenario

C_B_TRUE = 150e-12
TX_DBM = -5.0
NOISE_DB = 0.1
SEED = 20240

scn = load_scenario(bundled_config("reference_body.cfg"))
f = np.logspace(5, np.log10(20e6), 41)
f[0], f[-1] = 1e5, 20e6
gain = model_gain_db(scn.channel, C_B_TRUE, f)
gain = gain + np.random.default_rng(SEED).normal(0.0, NOISE_DB, f.size)

records = [SweepRecord(float(fk), float(TX_DBM + g), TX_DBM) for fk, g in zip(f, gain)]
header = (
    "# synthetic sweep: reference body with C_B = 150 pF, Tx setpoint -5 dBm,\n"
    "# 0.1 dB Gaussian noise (seed 20240); see notebooks/make_calibration_fixture.py\n"
)
out = Path(__file__).resolve().parents[1] / "src" / "brhbc" / "data" / "calib_fixture_150pF.csv"
out.write_text(header + dump_sweep(records))
print(f"wrote {len(records)} rows to {out}")
print("gain range: %.2f .. %.2f dB" % (gain.min(), gain.max()))
