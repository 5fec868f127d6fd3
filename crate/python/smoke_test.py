#!/usr/bin/env python3
"""Smoke test for the graphheat Python extension.

Builds nothing itself: run `cargo build --release -p graphheat-py` first,
then `python3 python/smoke_test.py`. The script locates the cdylib in
target/, exposes it as an importable module, and exercises the main
surface: constructors, surgery, evaluators, and the spectral oracle.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def import_graphheat():
    candidates = [
        ROOT / "target" / "release" / "libgraphheat.so",
        ROOT / "target" / "debug" / "libgraphheat.so",
        ROOT / "target" / "release" / "libgraphheat.dylib",
        ROOT / "target" / "debug" / "libgraphheat.dylib",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("build the extension first: cargo build --release -p graphheat-py")
    staging = Path(tempfile.mkdtemp(prefix="graphheat-"))
    suffix = ".so" if lib.suffix == ".so" else ".so"  # CPython accepts .so on mac too
    shutil.copy(lib, staging / f"graphheat{suffix}")
    sys.path.insert(0, str(staging))
    import graphheat  # noqa: E402

    return graphheat


def main():
    gh = import_graphheat()
    print(f"graphheat {gh.__version__}")

    # special functions
    assert abs(gh.erfc(0.0) - 1.0) < 1e-15
    assert abs(gh.erfc(1.0) - 0.15729920705028513) < 1e-15
    assert abs(gh.h_kernel(0.0) - 1.0 / math.sqrt(math.pi)) < 1e-15
    assert gh.path_tail_bound(3, 1.0, 0.05, 4.0) < 1e-30

    # interval heat content against the eigenvalue series
    g = gh.Graph.interval(3.0, dirichlet_left=True, dirichlet_right=False)
    t = 0.1
    value, err = g.heat_content(t, tol=1e-12)
    series = 8.0 * 3.0 / math.pi**2 * sum(
        math.exp(-t * (math.pi * (2 * k + 1) / 6.0) ** 2) / (2 * k + 1) ** 2
        for k in range(200)
    )
    assert abs(value - series) < 1e-10, (value, series)
    assert err < 1e-10

    # lasso surgery identities
    lasso = gh.Graph.lasso(1.0, 2.0)
    assert lasso.degree(1) == 3
    q, _ = lasso.heat_content(0.5, tol=1e-11)
    cut = lasso.midpoint_loop_cut(1)
    assert cut.same_shape(gh.Graph.star(3, 1.0, 1))
    q_cut, _ = cut.heat_content(0.5, tol=1e-11)
    assert abs(q - q_cut) < 1e-9, (q, q_cut)

    mirrored = gh.Graph.interval(1.0).mirror([1], 3)
    assert mirrored.same_shape(gh.Graph.star(3, 1.0, 3))
    qm, _ = mirrored.heat_content(0.2, tol=1e-11)
    qi, _ = gh.Graph.interval(1.0).heat_content(0.2, tol=1e-11)
    assert abs(qm - 3 * qi) < 1e-9

    # spectral oracle agreement
    spectral = lasso.spectral_heat_content(0.5, h=2.5e-3)
    assert abs(spectral - q) < 1e-4, (spectral, q)
    lam1 = lasso.lambda_1(h=2.5e-3)
    assert lam1 >= math.pi**2 / (4 * lasso.volume() ** 2) - 1e-6
    assert lam1 * lasso.torsional_rigidity(h=2.5e-3) < lasso.volume()

    # kernel symmetry and flux positivity
    a, b = (0, 0.4), (1, 1.3)
    k_ab, _ = lasso.heat_kernel(a, b, 0.2)
    k_ba, _ = lasso.heat_kernel(b, a, 0.2)
    assert abs(k_ab - k_ba) < 1e-10 and k_ab > 0.0
    flux, _ = lasso.boundary_flux([(1, 0.5, 1.5)], 1e-3, tol=1e-12)
    scaled = math.sqrt(math.pi) / math.sqrt(1e-3) * flux
    assert abs(scaled - 2.0) < 1e-3, scaled

    # derivative under edge lengthening tends to 1
    d, _ = lasso.hadamard_derivative(0, 1e-3)
    assert abs(d - 1.0) < 1e-6

    # JSON round trip and validation reporting
    round_trip = gh.Graph.from_json(lasso.to_json())
    assert round_trip.same_shape(lasso)
    bad = gh.Graph(["standard", "standard"], [(0, 1, 1.0)])
    assert any("Dirichlet" in p for p in bad.validate())

    print("smoke test OK")


if __name__ == "__main__":
    main()
