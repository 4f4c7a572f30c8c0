"""Risk of a single traffic scene, cell by cell.

A host car at 25 m/s meets a parked car ahead, a cyclist crossing from the
right and a car in the next lane that is pulling away.
"""

import numpy as np

from podar import BodyGeometry, KinematicState, PodarParams, RoadObject, evaluate_scene, Scene

host = RoadObject("host", KinematicState.create((0.0, 0.0), (25.0, 0.0)),
                  BodyGeometry.rectangle(4.5, 1.9))

parked = RoadObject("parked", KinematicState.create((90.0, 0.2)),
                    BodyGeometry.rectangle(4.5, 1.9), object_type="vehicle")
cyclist = RoadObject("cyclist", KinematicState.create((60.0, -8.0), (0.0, 4.0)),
                     object_type="bicycle", mass=1.0, sensitivity=2.0)
leaving = RoadObject("leaving", KinematicState.create((8.0, 3.5), (32.0, 0.0)),
                     BodyGeometry.rectangle(4.5, 1.9))

scene = Scene(host, (parked, cyclist, leaving))
params = PodarParams(T=5.0, k=1.0, A=1.04, B=1.94)

res = evaluate_scene(scene, params)
obj, step = res.argmax
print(f"scene risk {res.final_podar:.4g}, from {obj} at t = {res.times[step]:.1f} s")

# Where each object peaks, and why.
for n, oid in enumerate(res.object_ids):
    i = int(np.argmax(res.per_pair[n]))
    print(f"  {oid:8s} peak {res.per_pair[n, i]:9.4g} at t={res.times[i]:3.1f} s"
          f"  G={res.damage[n, i]:8.1f}  wT={res.omega_t[n, i]:.3f}"
          f"  wD={res.omega_d[n, i]:.3f}  d={res.distance[n, i]:.2f} m")

# The car pulling away opens the gap, yet the speed-sum share of the closing
# speed keeps its damage positive; distance attenuation does the rest.
v_rel = np.subtract(leaving.state.velocity, host.state.velocity)
print("leaving car: relative velocity", v_rel, "damage at t=0", round(res.damage[2, 0], 1))
# A car behind the host moving slower really does separate: zero risk.
behind = RoadObject("behind", KinematicState.create((-30.0, 0.0), (5.0, 0.0)))
print("slow car behind:", evaluate_scene(Scene(host, (behind,)), params).final_podar)

# A driver who discounts the future more strongly sees the same scene as safer.
for A in (0.5, 1.04, 1.5):
    print(f"A = {A:4.2f}: risk {evaluate_scene(scene, params.replace(A=A)).final_podar:.4g}")
