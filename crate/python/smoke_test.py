"""Smoke test for the nlqw extension module.

Build and install first, e.g. `pip install ./crates/python`, then run
`python3 python/smoke_test.py`.
"""

import math

import nlqw

h = 1 / math.sqrt(2)
coin = nlqw.BaseCoin.hadamard()
assert abs(coin.abs_a - h) < 1e-15

# One linear step splits the walker evenly.
u0 = nlqw.LatticeState.point(0, 1, 0)
u1 = nlqw.step_linear(u0, coin)
dist = dict(u1.position_distribution())
assert set(dist) == {-1, 1}
assert all(abs(p - 0.5) < 1e-15 for p in dist.values())
back = nlqw.step_linear_inverse(u1, coin)
assert abs(back.inner(u0) - 1) < 1e-14

# g = 0 matches the linear walk.
free = nlqw.CoinModel(coin, "scalar_phase", m=3, g=0.0)
assert free.is_linear()
assert nlqw.step(u0, free).sites() == u1.sites()

# Norm is conserved by the nonlinear walk.
cubic = nlqw.CoinModel(coin, "scalar_phase", m=3, kappa=1.0, g=0.05)
u = nlqw.evolve(cubic, u0, 500)
assert abs(u.norm_l2() - 1) < 1e-12

# Spectral helpers.
lam, (p1, p2) = nlqw.eigenpair(coin, 0.3, 1)
assert abs(abs(lam) - 1) < 1e-14
assert abs(abs(p1) ** 2 + abs(p2) ** 2 - 1) < 1e-14
k = nlqw.k_branch(0.2, 1, 0, coin)
assert abs(nlqw.group_velocity(coin, k, 1) - 0.2) < 1e-12

# Symmetric state: flat weight, second moment 1 - 1/sqrt(2).
sym = nlqw.LatticeState.point(0, h, 1j * h)
density = nlqw.limit_density(sym, coin)
assert abs(density.total_mass - 1) < 1e-10
assert all(abs(w - 1) < 1e-10 for w in density.weights())
assert abs(density.moment(2) - (1 - h)) < 1e-9
assert abs(density.cdf(0.0) - 0.5) < 1e-9

# Scattering and the weak-limit report.
result = nlqw.extract_asymptotic(u0, cubic, tol=1e-6, t_max=1024)
assert result["converged"] and result["final_T"] == 1024
report = nlqw.verify(nlqw.CoinModel(coin), sym, checkpoints=[256, 1024])
assert [r["t"] for r in report["rows"]] == [256, 1024]
assert report["rows"][-1]["ks"] < report["rows"][0]["ks"]
assert report["csv"].startswith("t,ks,")

try:
    nlqw.BaseCoin(1, 0)
except ValueError as e:
    assert "DegenerateCoin" in str(e)
else:
    raise AssertionError("degenerate coin accepted")

print("nlqw smoke test: ok")
