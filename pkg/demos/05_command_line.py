"""The whole pipeline through the command line, in a scratch folder.

synth writes signals from two known drivers, calibrate fits them back and
report compares the fit with itself (a stand-in for a second signal kind).
"""

import subprocess
import sys
import tempfile
from pathlib import Path

SPEC = """\
[P1]
T = 4
k = 1.0
A = 1.2
B = 2.5

[P2]
T = 6
k = 1.0
A = 0.7
B = 1.5
"""


def podar(*args):
    cmd = [sys.executable, "-m", "podar.cli", *args]
    print("$ podar", " ".join(args))
    done = subprocess.run(cmd, capture_output=True, text=True)
    print(done.stdout + done.stderr, end="")
    return done.returncode


with tempfile.TemporaryDirectory() as tmp:
    work = Path(tmp)
    (work / "spec.ini").write_text(SPEC)
    podar("synth", "--spec", str(work / "spec.ini"), "--out", str(work / "signals.csv"))
    # Synthetic signals are already normalized, so they go in as subjective.
    podar("calibrate", "--signals", str(work / "signals.csv"), "--kind", "subjective",
          "--horizons", "3,4,5,6,7", "--out", str(work / "fit"))
    print((work / "fit" / "summary.csv").read_text())
    podar("report", "--objective", str(work / "fit"), "--subjective", str(work / "fit"),
          "--out", str(work / "report"))
    print(sorted(p.name for p in (work / "report").iterdir()))

    rc = podar("calibrate", "--signals", str(work / "missing.csv"), "--kind", "objective")
    print("exit status for a missing file:", rc)
