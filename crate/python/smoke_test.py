"""Smoke test for the mvop_py extension.

Build and install first:
    cd crates/mvop-py && maturin build --release -o dist && pip install dist/*.whl
Then run:
    python python/smoke_test.py
"""

import cmath
import json
import math

import mvop_py


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    # scalar Legendre: C_n = n^2 / (4 n^2 - 1)
    leg = mvop_py.Family.custom(0.0, 0.0, [[[1.0]]])
    b, c, gamma = leg.recurrence(12)
    for n in range(1, 12):
        assert close(c[n][0][0].real, n * n / (4 * n * n - 1), 1e-12), n
        assert abs(b[n][0][0]) < 1e-14
    assert close(gamma[0][0][0].real, 2.0, 1e-14)

    # Chebyshev first kind: zeros of T_n
    cheb = mvop_py.Family.custom(-0.5, -0.5, [[[1.0]]])
    zeros = cheb.det_zeros(7)
    want = sorted(math.cos((2 * k + 1) * math.pi / 14) for k in range(7))
    assert all(close(z, w, 1e-10) for z, w in zip(zeros, want)), zeros

    jac = mvop_py.Family.jacobi(1.0, 2.0, 1.0, 1)
    assert jac.size == 2
    p0 = jac.p_scaled(0, 0.3)
    assert p0 == [[1, 0], [0, 1]]

    # far from the interval the outer asymptotics approach the identity
    q = jac.outer(10, 1e6 + 0j)
    assert abs(q[0][0] - 1) < 1e-5 and abs(q[1][0]) < 1e-5

    # exact and leading-order inner values agree to O(1/n)
    exact = jac.p_scaled(80, 0.2)
    asym = jac.inner(80, 0.2)
    diff = math.sqrt(sum(abs(exact[i][j] - asym[i][j]) ** 2 for i in range(2) for j in range(2)))
    scale = math.sqrt(sum(abs(asym[i][j]) ** 2 for i in range(2) for j in range(2)))
    assert diff < 0.2 * scale, (diff, scale)

    blk = mvop_py.Family.gegenbauer_block(0.5)
    b2 = blk.b2()
    assert close(b2[0][1].real, math.sqrt(2) * 1.5, 1e-12)
    assert close(b2[1][0].real, 0.5 / math.sqrt(2), 1e-12)

    assert close(mvop_py.gamma(5.0), 24.0, 1e-14)
    assert close(mvop_py.bessel_j(0.5, 2.0), math.sqrt(2 / (math.pi * 2.0)) * math.sin(2.0), 1e-14)
    assert abs(mvop_py.phi(2 + 0j) - (2 + cmath.sqrt(3))) < 1e-14

    try:
        jac.inner(10, 0.999)
    except mvop_py.MvopError as e:
        assert "outside" in str(e)
    else:
        raise AssertionError("expected MvopError")

    code, artifact, summary = mvop_py.run("recurrence", json.dumps({"nmax": 31, "format": "json"}))
    assert code == 0, summary
    assert json.loads(artifact)["nmax"] == 31
    code, _, summary = mvop_py.run("recurrence", json.dumps({"family": "laguerre"}))
    assert code == 2, summary

    print("mvop_py smoke test passed")


if __name__ == "__main__":
    main()
