import json
import os
import subprocess
import sys

import numpy as np
import pytest

from pke_lab import _accel

PROBE = r"""
import json, numpy as np
import pke_lab
from pke_lab import jets, quartic_weyl as qw, geometry
rng = np.random.default_rng(7)
C = rng.standard_normal((200, 5))
a = rng.standard_normal((jets.N, jets.N)) * jets._MASK
b = rng.standard_normal((jets.N, jets.N)) * jets._MASK
b[0, 0] = 2.0
print(json.dumps({
    "backend": pke_lab.backend(),
    "inv": qw.invariants_batch(C).tolist(),
    "tags": [str(t) for t in qw.classify_batch(C)],
    "mul": jets.mul_kernel(a, b).tolist(),
    "div": jets.div_kernel(a, b).tolist(),
}))
"""


def probe(disable):
    env = dict(os.environ)
    env.pop(_accel.ENV_FLAG, None)
    if disable:
        env[_accel.ENV_FLAG] = "1"
    res = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")
def test_env_flag_switches_backend_with_equal_results():
    fast, slow = probe(False), probe(True)
    assert fast["backend"] == "numba" and slow["backend"] == "numpy"
    assert fast["tags"] == slow["tags"]
    inv_f, inv_s = np.array(fast["inv"]), np.array(slow["inv"])
    assert np.allclose(inv_f, inv_s, rtol=1e-11, atol=1e-11)
    assert np.allclose(fast["mul"], slow["mul"], rtol=1e-13, atol=1e-14)
    assert np.allclose(fast["div"], slow["div"], rtol=1e-11, atol=1e-13)


def test_disabled_probe_runs():
    assert probe(True)["backend"] == "numpy"
