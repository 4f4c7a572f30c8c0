"""What the published per-driver parameter tables imply on their own.

No dataset is needed: the attenuation curves follow from A and B alone.
"""

import math

import numpy as np

from podar import PodarParams, compare_signals
from podar.report import attenuation_table, spread_curve, spread_peak_time

drivers = [f"P{i}" for i in range(1, 9)]
objective = dict(zip(drivers, zip([1.060, 0.836, 1.076, 1.079, 1.036, 1.446, 0.774, 1.015],
                                  [3.716, 1.577, 2.126, 0.850, 2.269, 1.399, 2.617, 0.941])))
subjective = dict(zip(drivers, zip([0.506, 0.275, 0.170, 0.585, 0.655, 0.956, 0.273, 0.364],
                                   [4.765, 2.125, 1.430, 0.575, 3.537, 7.115, 2.573, 0.886])))
obj = {d: PodarParams(5.0, 1.0, a, b) for d, (a, b) in objective.items()}
subj = {d: PodarParams(5.0, 1.0, a, b) for d, (a, b) in subjective.items()}

print("objective attenuation at 2 s / 3 s and 1 m / 2 m")
for row in attenuation_table(obj):
    print("  {driver}  {t2:.3f} {t3:.3f}   {d1:.3f} {d2:.3f}".format(
        driver=row["driver"], t2=row["omega_T@2s"], t3=row["omega_T@3s"],
        d1=row["omega_D@1m"], d2=row["omega_D@2m"]))
print("drivers under 20% after 2 s:", sum(math.exp(-2 * p.A) < 0.2 for p in obj.values()))
print("drivers under 40% at 1 m:  ", sum(math.exp(-p.B) < 0.4 for p in obj.values()))

# Largest disagreement between drivers' temporal curves.
rates = [p.A for p in obj.values()]
t = np.linspace(0, 7, 1401)
print(f"spread peaks at {spread_peak_time(min(rates), max(rates)):.3f} s"
      f" (sampled {t[np.argmax(spread_curve(rates, t))]:.3f} s)")

cmp = compare_signals(obj, subj)
print(f"A: objective > subjective for {sum(a > b for a, b in cmp.A_pairs)}/8 drivers,"
      f" r = {cmp.A_correlation:.3f}, outliers {cmp.A_outliers}")
print(f"B: r = {cmp.B_correlation:.3f}, outliers {cmp.B_outliers}")
