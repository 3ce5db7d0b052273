"""Smoke test for the jrsa Python module.

Build and install first:  pip install -e crates/python --no-build-isolation
Run:                      python python/smoke_test.py   (or pytest python/)
"""

import math
from fractions import Fraction

import jrsa


def test_exact_moments():
    p = jrsa.ModelParams(2, 1, "1")
    assert p.moments(5) == [1, Fraction(1, 2), Fraction(5, 8), 1, Fraction(231, 128), Fraction(7, 2)]
    q = jrsa.ModelParams(3, 1, Fraction(2, 3))
    for n in range(1, 8):
        assert q.moment(n) == q.moment(n, "derivative") == q.moment(n, "series")
    assert jrsa.fuss_catalan(1, 5) == [1, 1, 2, 5, 14]
    assert jrsa.raney("1", "1/2", 4) == [1, Fraction(1, 2), Fraction(3, 8), Fraction(5, 16)]


def test_free_convolution():
    assert jrsa.free_multiply("fc:1,raney:1:1/2", 4) == [1, Fraction(1, 2), Fraction(5, 8), 1]
    assert jrsa.free_multiply("fc:1,fc:1", 5) == [1, 1, 3, 12, 55]
    assert jrsa.verify_factorization(4, 2, 10)


def test_spectral():
    mp = jrsa.SpectralModel(jrsa.ModelParams(1, 0))
    assert abs(mp.x_star - 4.0) < 1e-12
    assert abs(mp.density(2.0) - 1 / (2 * math.pi)) < 1e-9
    assert mp.support()["x_tilde"] is None
    m = jrsa.SpectralModel(jrsa.ModelParams(2, 1, 1))
    q = m.quadrature_moments(3)
    assert all(abs(a - b) < 1e-9 for a, b in zip(q, [1, 0.5, 0.625, 1.0]))
    assert all(rho > 0 for _, rho in m.density_grid(16))


def test_monte_carlo():
    rep = jrsa.simulate(40, 2, 1, trials=10, seed=3)
    assert len(rep["verdicts"]) == 4
    ev = jrsa.sample_spectrum(10, 2, 1, index=0, seed=3)
    assert len(ev) == 10 and min(ev) >= 0


def test_errors():
    for bad in [lambda: jrsa.ModelParams(2, 3, 1), lambda: jrsa.ModelParams(2, 1, "x"),
                lambda: jrsa.SpectralModel(jrsa.ModelParams(2, 2, 1))]:
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")
    print(f"jrsa {jrsa.__version__}: smoke test passed")
