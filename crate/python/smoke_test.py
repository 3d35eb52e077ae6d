"""Build the sislab extension with cargo, import it and exercise the main calls."""

import cmath
import importlib
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    subprocess.run(
        ["cargo", "build", "-p", "sislab-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "debug" / "libsislab_py.so"
    dest = Path(tempfile.mkdtemp()) / "sislab.so"
    shutil.copy(built, dest)
    sys.path.insert(0, str(dest.parent))
    return importlib.import_module("sislab")


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    sl = load()
    hat = sl.Schedule.stationary(sl.Mask.hat())

    ts, vs = sl.basic_limit(hat, 10)
    for t, v in zip(ts, vs):
        assert close(v.real, max(0.0, 1.0 - abs(t))), (t, v)

    values, _ = sl.phi_hat(hat, 0.5)
    assert close(values[0].real, 4.0 / cmath.pi**2)

    reports = sl.decay(hat, 0j, order=1)
    assert reports[0]["verdict"]["support"] == [0]
    assert reports[1]["verdict"]["support"] == []

    lo, w0 = sl.omegas(hat, 0j, order=1)[0]
    assert close(w0[-lo].real, 1.0, 1e-8)

    space = sl.ExponentialSpace([(1 + 0j, 0)])
    sched = sl.construct_schedule(space)
    rep = sl.verify_generation(sched, space, 8)
    assert rep["verdict"] and rep["residual"] <= 1e-6, rep
    assert not sl.verify_generation(hat, space, 8, tol=1e-2)["verdict"]

    zeros = sl.check_zero_conditions(hat, 1 + 0j, 0, 8)
    assert not zeros["verdict"]

    basis = sl.h_lambda_basis(hat, 0j, 1, -1.0, 1.0, 4)
    assert basis["consistency"] <= 1e-8

    assert sl.is_invariant([[1, 0, 0], [0, 0, 1]], 1)
    assert len(sl.minimal_invariant_subspace([0, 1, 0], 1)) == 2
    assert sl.lagrange_bound([1], [0.3])["verdict"]

    back = sl.Schedule.from_json(sched.to_json())
    assert not back.stationary_tail

    try:
        sl.Mask([1, 1, 1])
    except sl.SislabError:
        pass
    else:
        raise AssertionError("unnormalized mask accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
