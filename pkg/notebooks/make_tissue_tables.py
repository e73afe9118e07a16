"""
Generate the bundled tissue dispersion tables
=============================================

Evaluates the four-term Cole-Cole parameterization of dry skin and muscle
on a 20-points-per-decade grid from 100 kHz to 1 GHz and writes the CSV
files shipped in ``brhbc/data``. Run from the repository root::

    python notebooks/make_tissue_tables.py
"""

from pathlib import Path

import numpy as np

from brhbc.dielectrics import (
    GABRIEL_PARAMS,
    DielectricSpectrum,
    TissueKind,
    cole_cole,
    dump_dispersion_table,
)

out_dir = Path(__file__).resolve().parents[1] / "src" / "brhbc" / "data"
freqs = np.logspace(5, 9, 81)

for kind, fname in [(TissueKind.SKIN, "skin_dry.csv"), (TissueKind.MUSCLE, "muscle.csv")]:
    eps, sig = cole_cole(GABRIEL_PARAMS[kind], freqs)
    spectrum = DielectricSpectrum(kind, freqs, eps, sig)
    note = (
        f"{kind.value}: four-term Cole-Cole, Gabriel et al. 1996 parameters\n"
        "generated by notebooks/make_tissue_tables.py"
    )
    (out_dir / fname).write_text(dump_dispersion_table(spectrum, note))
    i100 = np.argmin(abs(freqs - 1e8))
    print(f"{fname}: {freqs.size} rows; at {freqs[i100]:.3g} Hz eps_r={eps[i100]:.2f} sigma={sig[i100]:.3f} S/m")
