"""Walk through the reference body from line parameters to leakage and safety.

Run with ``python3 notebooks/reference_walkthrough.py``. Every number printed
here comes from the bundled configs, so the output is reproducible.
"""

import numpy as np

from brhbc.bodyline import TerminationNetwork, pul_params, solve
from brhbc.channel import BR_BAND, EQS_BAND, dominant_peaks, find_features, shannon_capacity, sweep_gain
from brhbc.leakage import offbody_profile
from brhbc.safety import exposure_estimate, modeled_tx_power
from brhbc.scenario import bundled_config, load_scenario


def strongest(resp):
    return max(dominant_peaks(find_features(resp)), key=lambda s: s.gain_db)


ref = load_scenario(bundled_config("reference_body.cfg"))
cu = load_scenario(bundled_config("copper_cylinder.cfg"))
thick = load_scenario(bundled_config("thick_cylinder.cfg"))

# Per-unit-length parameters of the skin/muscle cylinder over ground
seg = ref.channel.path[0]
print("per-unit-length parameters")
for f in (1e6, 70e6, 300e6):
    p = pul_params(seg, f)
    print(f"  {f / 1e6:6.1f} MHz  R'={float(p.r_series):8.3f} ohm/m  L'={p.l * 1e9:6.1f} nH/m  "
          f"G'={float(p.g):.3e} S/m  C'={p.c * 1e12:5.2f} pF/m")

# Swept gain and the body resonance
resp = sweep_gain(ref.channel, ref.sweep)
pk = strongest(resp)
print(f"\nreference peak {pk.f_c / 1e6:.2f} MHz at {pk.gain_db:.2f} dB (Q {pk.q:.2f}); "
      f"1 MHz gain {resp.gain_at(1e6):.2f} dB")
for name, scn in (("copper", cu), ("r = 14 cm", thick)):
    r = sweep_gain(scn.channel, scn.sweep)
    s = strongest(r)
    print(f"{name:>10}: peak {s.f_c / 1e6:.2f} MHz at {s.gain_db:.2f} dB, 1 MHz gain {r.gain_at(1e6):.2f} dB")

# Termination: capacitive load keeps the EQS band flat, a 50 ohm load makes it high-pass
f = np.logspace(5, np.log10(20e6), 5)
low = ref.channel.with_(termination=TerminationNetwork(50.0, 2.3e-12))
print("\nEQS gain, 2.3 pF vs 50 ohm || 2.3 pF")
for fk, a, b in zip(f, solve(ref.channel, f).gain, solve(low, f).gain):
    print(f"  {fk / 1e6:7.3f} MHz  {20 * np.log10(abs(a)):7.2f} dB  {20 * np.log10(abs(b)):7.2f} dB")

# Capacity at equal transmit power spectral density
rep = shannon_capacity(resp, ref.noise, ref.capacity.tx_power_dbm, BR_BAND, EQS_BAND)
print(f"\ncapacity {rep.capacity_bits_per_s:.3e} bit/s in 30-300 MHz, "
      f"{rep.reference_capacity_bits_per_s:.3e} bit/s in 0.1-20 MHz (ratio {rep.comparison_ratio:.1f})")
p_tx = modeled_tx_power(ref.channel, pk.f_c)
print(f"modeled Tx power at the peak {p_tx * 1e3:.3f} mW, "
      f"{p_tx / rep.capacity_bits_per_s * 1e12:.3f} pJ/bit")

# Leakage and exposure at the peak
prof = offbody_profile(ref.channel, pk.f_c, [0.1, 0.3, 0.5, 1.0, 3.0, 10.0])
print(f"\noff-body ratio (r_d = {prof.r_d:.2f} m):")
for d, q in zip(prof.distances, prof.ratio):
    print(f"  {d:5.1f} m  {q:.4f}")
exp = exposure_estimate(ref.channel, pk.f_c, 1.0)
me, mh, ms = exp.margins
print(f"\nexposure at 1 V: E {exp.induced_e:.3e} V/m ({me:.0f}x), H {exp.induced_h:.3e} A/m ({mh:.1f}x), "
      f"SAR {exp.sar_avg:.3e} W/kg ({ms:.3g}x)")
