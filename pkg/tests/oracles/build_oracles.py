"""
Regenerate ``frozen.json``: reference values derived independently of the
package with sympy (symbolic differentiation) and mpmath (high precision).

Run from the repository root:  python tests/oracles/build_oracles.py
"""

import json
from pathlib import Path

import mpmath as mp
import sympy as sp

x, y, z, t = sp.symbols("x y z t", real=True)
U, L, T, nu = sp.symbols("U L T nu", positive=True)
PARAMS = {U: sp.Rational(13, 10), L: sp.Rational(7, 10), T: sp.Rational(19, 10), nu: sp.Rational(11, 100)}
POINTS_3D = [(0.3, -0.4, 0.5, 0.2), (1.1, 0.7, -0.9, 1.5), (-0.6, 0.25, 0.8, 3.0)]
POINTS_2D = [(0.3, -0.4, 0.2), (1.1, 0.7, 1.5), (-2.6, 4.25, 3.0)]


def curl(u, dim):
    if dim == 2:
        return sp.diff(u[1], x) - sp.diff(u[0], y)
    return [sp.diff(u[2], y) - sp.diff(u[1], z), sp.diff(u[0], z) - sp.diff(u[2], x),
            sp.diff(u[1], x) - sp.diff(u[0], y)]


def num(expr, pt, dim):
    subs = dict(PARAMS)
    subs.update(zip((x, y, z)[:dim] + (t,), pt))
    if isinstance(expr, (list, tuple)):
        return [float(sp.N(sp.sympify(e).subs(subs), 30)) for e in expr]
    return float(sp.N(sp.sympify(expr).subs(subs), 30))


def convective(u, dim):
    X = (x, y, z)[:dim]
    return [sum(u[j] * sp.diff(u[i], X[j]) for j in range(dim)) for i in range(dim)]


def fields():
    r2 = x ** 2 + y ** 2 + z ** 2
    a = sp.Rational(2, 3)
    E = sp.exp(-t / T)
    return {
        "taylor-green-init": (3, [U * sp.sin(x / L) * sp.cos(y / L), -U * sp.cos(x / L) * sp.sin(y / L), 0]),
        "periodic-decay-3d": (3, [U * sp.sin(y / L) * E, U * sp.sin(z / L) * E, U * sp.sin(x / L) * E]),
        "gaussian-swirl-3d": (3, [U * E * sp.exp(-r2 / L ** 2) * y / L, -U * E * sp.exp(-r2 / L ** 2) * x / L, 0]),
        "tg-embedded-2d": (2, [T ** a * sp.sin(x / L) * sp.cos(y / L), -T ** a * sp.cos(x / L) * sp.sin(y / L)]),
        "gaussian-vortex-3d": (3, [T ** a * sp.exp(-r2 / L ** 2) / L ** 2 * c for c in (y * z, x * z, -2 * x * y)]),
        "taylor-green-exact-2d": (2, [U * sp.sin(x / L) * sp.cos(y / L) * sp.exp(-2 * nu * t / L ** 2),
                                      -U * sp.cos(x / L) * sp.sin(y / L) * sp.exp(-2 * nu * t / L ** 2)]),
    }


def field_oracles():
    out = {}
    for name, (dim, u) in fields().items():
        pts = POINTS_3D if dim == 3 else POINTS_2D
        w = curl(u, dim)
        out[name] = {
            "points": [list(p) for p in pts],
            "velocity": [num(u, p, dim) for p in pts],
            "dudt": [num([sp.diff(c, t) for c in u], p, dim) for p in pts],
            "vorticity": [num(w, p, dim) for p in pts],
            "divergence": [num(sum(sp.diff(c, X) for c, X in zip(u, (x, y, z))), p, dim) for p in pts],
        }
    return out


def taylor_green_exact():
    _, u = fields()["taylor-green-exact-2d"]
    p = U ** 2 / 4 * (sp.cos(2 * x / L) + sp.cos(2 * y / L)) * sp.exp(-4 * nu * t / L ** 2)
    conv = convective(u, 2)
    residual = [sp.simplify(sp.diff(u[i], t) + conv[i] + sp.diff(p, v) - nu * (sp.diff(u[i], x, 2) + sp.diff(u[i], y, 2)))
                for i, v in enumerate((x, y))]
    printed = -p
    printed_residual = [sp.simplify(sp.diff(u[i], t) + conv[i] + sp.diff(printed, v) - nu * (sp.diff(u[i], x, 2) + sp.diff(u[i], y, 2)))
                        for i, v in enumerate((x, y))]
    return {
        "residual_with_plus_quarter": [str(r) for r in residual],
        "residual_with_minus_quarter_is_zero": all(r == 0 for r in printed_residual),
        "pressure": [num(p, pt, 2) for pt in POINTS_2D],
    }


def periodic_decay():
    dim, u = fields()["periodic-decay-3d"]
    conv = convective(u, dim)
    coef = U * (nu / L ** 2 - 1 / T)
    p_printed = -coef * (sp.cos(y / L) + sp.cos(z / L) + sp.cos(x / L)) * sp.exp(-t / T)
    grad_printed = [sp.diff(p_printed, v) for v in (x, y, z)]
    claimed = [coef * c / U for c in u]
    # (u.grad)u sup over space at t = 1/2 with U = L = T = 1: brute force on a dense lattice
    import numpy as np
    s = np.linspace(0, 2 * np.pi, 97)
    X, Y, Z = np.meshgrid(s, s, s, indexing="ij")
    e2 = np.exp(-1.0)
    comps = [np.sin(Z) * np.cos(Y) * e2, np.sin(X) * np.cos(Z) * e2, np.sin(Y) * np.cos(X) * e2]
    return {
        "convective_component_1": str(sp.simplify(conv[0])),
        "convective_at_points": [num(conv, p, 3) for p in POINTS_3D],
        "printed_gradient_minus_claimed": [num([g - c for g, c in zip(grad_printed, claimed)], p, 3) for p in POINTS_3D],
        "convective_sup_unit_t_half": float(max(np.abs(c).max() for c in comps)),
    }


def gaussian_laplacian():
    g = sp.exp(-(x ** 2 + y ** 2 + z ** 2) / L ** 2)
    lap = sp.simplify((sp.diff(g, x, 2) + sp.diff(g, y, 2) + sp.diff(g, z, 2)) / g)
    poly = sp.Poly(sp.expand(lap * L ** 4), x, y, z)
    return {"laplacian_over_gaussian": str(lap), "constant_coefficient_times_L2": str(sp.simplify(poly.coeff_monomial(1) / L ** 2))}


def leray():
    r2 = x ** 2 + y ** 2 + z ** 2
    u = [y * sp.exp(-r2 / t) / t, -x * sp.exp(-r2 / t) / t, 0]
    p = sp.exp(-r2 / t) / t
    radial = lambda f: x * sp.diff(f, x) + y * sp.diff(f, y) + z * sp.diff(f, z)
    lhs_u = [sp.simplify((radial(c) + 2 * t * sp.diff(c, t)) / c) if c != 0 else 0 for c in u]
    lhs_p = sp.simplify((radial(p) + 2 * t * sp.diff(p, t)) / p)
    return {"velocity_ratio": [str(v) for v in lhs_u], "pressure_ratio": str(lhs_p)}


def couette():
    mp.mp.dps = 40
    def u(yv, tv, terms, h=1, nuv=1):
        s = mp.nsum(lambda n: mp.e ** (-(n * mp.pi) ** 2 * nuv * tv / h ** 2) * mp.sin(n * mp.pi * (1 - yv / h)) / n, [1, terms])
        return yv / h - 2 / mp.pi * s
    cases = []
    for terms in (1, 5, 50):
        for yv in (mp.mpf(0), mp.mpf("0.25"), mp.mpf("0.5"), mp.mpf(1)):
            for tv in (mp.mpf("0.01"), mp.mpf("0.1"), mp.mpf(1)):
                val = u(yv, tv, terms, nuv=mp.mpf("0.5"))
                dudt = mp.diff(lambda s: u(yv, s, terms, nuv=mp.mpf("0.5")), tv)
                d2 = mp.diff(lambda s: u(s, tv, terms, nuv=mp.mpf("0.5")), yv, 2)
                cases.append({"terms": terms, "y": float(yv), "t": float(tv), "nu": 0.5,
                              "u": float(val), "dudt": float(dudt), "pde_residual": float(dudt - mp.mpf("0.5") * d2)})
    return cases


def gaussian_energy():
    mp.mp.dps = 30
    return {"energy_exp_minus_2r2": float((mp.pi / 2) ** mp.mpf(1.5))}


def bkm():
    # sup|omega| on a lattice through x = y = z = 0 is sqrt(3) U/L exp(-t/T)
    mp.mp.dps = 30
    return {"periodic_decay_0_10T": float(mp.sqrt(3) * (1 - mp.e ** -10))}


def main():
    data = {
        "fields": field_oracles(),
        "taylor_green_exact": taylor_green_exact(),
        "periodic_decay": periodic_decay(),
        "gaussian_laplacian": gaussian_laplacian(),
        "leray": leray(),
        "couette": couette(),
        "gaussian_energy": gaussian_energy(),
        "bkm": bkm(),
        "params": {str(k): float(v) for k, v in PARAMS.items()},
    }
    path = Path(__file__).with_name("frozen.json")
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
