"""Smoke test for the pytriadne extension module.

Build the module first:

    cargo build --release -p triadne-python --features extension-module

then run `python3 python/smoke_test.py`. If `pytriadne` is not installed,
the freshly built library under target/ is imported directly.
"""

import importlib.util
import math
import pathlib
import sys


def load():
    try:
        import pytriadne

        return pytriadne
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        for name in ("libpytriadne.so", "libpytriadne.dylib", "pytriadne.dll"):
            path = root / "target" / profile / name
            if path.exists():
                spec = importlib.util.spec_from_file_location("pytriadne", path)
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                sys.modules["pytriadne"] = module
                return module
    sys.exit("pytriadne is not built; see the docstring at the top of this file")


def close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(1.0, abs(b))


def main():
    t = load()
    failures = []

    def check(label, ok):
        print(f"{'ok  ' if ok else 'FAIL'} {label}")
        if not ok:
            failures.append(label)

    check("#V_2 in Z^7", t.count_triangle_pairs(2, 7) == 1680)
    check("orbit count matches the DP", t.count_triangle_pairs(12, 5) == t.count_triangle_pairs_dp(12, 5))
    check("no triangles in the plane", all(t.count_triangle_pairs(l, 2) == 0 for l in range(1, 40)))
    pairs = t.triangle_pairs(2, 3)
    check("materialized pairs", len(pairs) == t.count_triangle_pairs(2, 3) and pairs == sorted(pairs))
    u, v = pairs[0]
    check("pair constraints", sum(x * x for x in u) == 2 and 2 * sum(a * b for a, b in zip(u, v)) == 2)
    check("box count", t.triangles_in_box(2, 3) == 80)

    check("trivial Gauss sum", close(t.gauss_g(1, [1, 0, 1], 0, 0), 1.0))
    check("congruence count", t.congruence_count(5, [1, 0, 1]) >= 1)
    check("Weyl sum at alpha = (1/2, 0, 0)", close(t.weyl_sum(1, [0.5, 0.0, 0.0], 0.0, 0.0), -3.0))
    check("Dirichlet approximation of 0", t.dirichlet_approx(0.0, 16, 2) == (1, 1))

    check("c_7", close(t.c_d(7), 9 * math.pi**3 / 128, 1e-8))
    area = 16 * math.pi**3 / 15
    check("sphere transform at 0 is the area of S^6", close(t.sphere_ft([0.0] * 7), area, 1e-8))
    value, err = t.singular_integral(1.0, [0.0] * 7)
    check("singular integral against c_7 |S^6|", abs(value - t.c_d(7) * area) < 0.05 * t.c_d(7) * area and err >= 0)

    check("local density", t.local_density(2, 1, 6, 7) > 0)
    sigma, tail = t.singular_series(6, 7, 8)
    check("singular series", sigma > 0 and tail >= 0)

    zero = [0.0] * 7
    t_hat = t.multiplier_t_hat(4, zero)
    check("multiplier at 0 is the normalized count", close(t_hat, 47040 / 4**4))
    m = t.MainTermMultiplier(4, 7, 16)
    check("main term near the exact multiplier", abs(m(zero) - t_hat) < 1.0)

    f = t.GridFunction.delta([0, 0, 0, 0])
    tf = t.linearized(4, f)
    check("T_4 delta has l^1 norm 48 in Z^4", close(tf.lp_norm(1.0), 48.0))
    g = t.GridFunction(4, {(1, 0, 0, 0): 2.0, (0, 0, 0, 0): 1j})
    check("grid function entries", g[(1, 0, 0, 0)] == 2 and len(g.entries()) == 2)
    check("json round trip", t.GridFunction.from_json(g.to_json()) == g)
    check("translation", g.translate([1, 0, 0, 0])[(2, 0, 0, 0)] == 2)
    check("odd lambda annihilates", len(t.linearized(5, g)) == 0)
    mx = t.dyadic_maximal(8, f)
    check("maximal function dominates", all(abs(v) <= abs(mx[k]) + 1e-12 for k, v in tf.entries().items()))

    check("J_1(3)", t.vinogradov_count(1, 3) == 49)
    check("T(1)", t.sixth_moment_count(1) == 20561)
    report = t.verify_gauss_bound(6)
    check("report dict", report["schema"] == "triadne/1" and report["pass"] is True)

    try:
        t.count_triangle_pairs(4, 0)
        check("dimension 0 raises", False)
    except ValueError:
        check("dimension 0 raises", True)
    try:
        t.MainTermMultiplier(4, 7, 1000)
        check("oversized q_max raises", False)
    except ValueError:
        check("oversized q_max raises", True)

    if failures:
        sys.exit(f"{len(failures)} smoke check(s) failed")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
