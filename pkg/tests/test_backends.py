import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cxbohm import _accel

SCRIPT = r"""
import json, math
import numpy as np
from cxbohm import BACKEND, GaussianPacket, HarmonicOscillator, PotentialStep, integrate_trajectory
from cxbohm.ensemble import evolve_real_ensemble, sample_born

out = {"backend": BACKEND}
T = np.linspace(0, 2 * math.pi, 9)
for name, s, x0 in (("ho1", HarmonicOscillator(n=1), 1.35), ("step", PotentialStep(E=0.5, V0=0.25), -2.5 + 0.1j)):
    tr = integrate_trajectory(s, x0, (0, T[-1]), t_eval=T)
    out[name] = [[z.real, z.imag] for z in tr.x] + [tr.accepted_steps, tr.rejected_steps]
e = evolve_real_ensemble(sample_born(GaussianPacket(), 0.0, 200, 5), 1.5)
out["ens"] = e.positions.tolist()
print(json.dumps(out))
"""


def _run(disable):
    env = dict(os.environ)
    env.pop(_accel.ENV_FLAG, None)
    if disable:
        env[_accel.ENV_FLAG] = "1"
    r = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True, env=env, check=True)
    return json.loads(r.stdout)


def test_backends_agree():
    fast, slow = _run(False), _run(True)
    assert slow["backend"] == "numpy"
    if fast["backend"] != "numba":
        pytest.skip("numba not installed")
    for key in ("ho1", "step"):
        # same algorithm, same step sequence
        assert fast[key][-2:] == slow[key][-2:]
        np.testing.assert_allclose(np.array(fast[key][:-2]), np.array(slow[key][:-2]), rtol=0, atol=1e-12)
    np.testing.assert_allclose(fast["ens"], slow["ens"], rtol=0, atol=1e-9)


def test_flag_values():
    env = dict(os.environ, **{_accel.ENV_FLAG: "1"})
    r = subprocess.run([sys.executable, "-c", "import cxbohm; print(cxbohm.BACKEND)"], capture_output=True, text=True, env=env)
    assert r.stdout.strip() == "numpy"
