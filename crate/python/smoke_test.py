"""End-to-end check of the Python bindings.

Builds the extension if needed, stages it under an importable name, and
drives one call through every exposed entry point. Run from anywhere:

    python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
STAGE = Path(__file__).resolve().parent / "_build"


def stage_module() -> None:
    built = ROOT / "target" / "release" / "libdarboux_py.so"
    if not built.exists():
        subprocess.run(
            ["cargo", "build", "-p", "darboux-py", "--release"],
            cwd=ROOT,
            check=True,
        )
    STAGE.mkdir(exist_ok=True)
    target = STAGE / "darboux_py.so"
    if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
        shutil.copy2(built, target)
    sys.path.insert(0, str(STAGE))


def close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol


def main() -> None:
    stage_module()
    import darboux_py as dx

    # expressions: canonical forms, exact equality, derivatives
    assert dx.exprs_equal("(q + p)^2", "q^2 + 2*q*p + p^2")
    assert not dx.exprs_equal("q", "p")
    assert dx.canonical("(q^2 - p^2)/(q + p)") == dx.canonical("q - p")
    assert dx.differentiate("q^3", "q") == "3*q^2"

    # mechanics: the canonical bracket and a full oscillator period
    assert dx.poisson_bracket("q", "p", 1) == "-1"
    assert dx.poisson_bracket("q1*p2", "q2", 2) == dx.canonical("q1")
    rows = dx.flow("(q^2 + p^2)/2", 1, [1.0, 0.0], 2 * math.pi, 1e-3)
    t_end, state = rows[-1]
    assert close(t_end, 2 * math.pi, 1e-12)
    assert close(state[0], 1.0, 1e-8) and close(state[1], 0.0, 1e-8)

    # prequantization: operator values and the commutation identity
    assert dx.quantize("q", 1, "p^2") == "2*i*hbar*p"
    assert dx.quantum_residual("q^2", "p^2", 1, "q*p") == "0"

    # linear symplectic normal form of the standard 2x2 block
    basis, kernel_dim, pairs = dx.symplectic_basis([["0", "1"], ["-1", "0"]])
    assert kernel_dim == 0 and pairs == 1
    assert len(basis) == 2 and len(basis[0]) == 2

    # matrix exponential of a rotation generator
    m = dx.exp_matrix([[0, -1], [1, 0]])
    assert close(m[0][0].real, math.cos(1.0), 1e-12)
    assert close(m[1][0].real, math.sin(1.0), 1e-12)
    c = dx.ad([[0, 1], [0, 0]], [[0, 0], [1, 0]])
    assert c[0][0] == 1 and c[1][1] == -1

    # holonomy of a flat abelian connection d(x^2 y) around the unit square
    square = [[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]
    comps = [[["2*x*y"]], [["x^2"]]]
    hol = dx.holonomy(["x", "y"], comps, square, "rk4", 4000)
    assert abs(hol[0][0] - 1) < 1e-6
    w = dx.wilson_loop(["x", "y"], comps, square, "rk4", 4000)
    assert abs(w - 1) < 1e-6

    # geodesics of the flat plane are straight lines
    rows = dx.geodesic(["x", "y"], [["1", "0"], ["0", "1"]], [0.0, 0.0], [1.0, 2.0], 1.0, 1e-3)
    _, state = rows[-1]
    assert close(state[0], 1.0, 1e-9) and close(state[1], 2.0, 1e-9)

    # knots: the left trefoil through both constructors
    trefoil = dx.LinkDiagram(
        [(-1, [1, 2, 4, 3]), (-1, [3, 4, 6, 5]), (-1, [5, 6, 2, 1])]
    )
    assert trefoil.writhe() == -3
    assert trefoil.components() == 1
    assert trefoil.invariant("jones") == "-t^-4 + t^-3 + t^-1"
    assert trefoil.invariant("conway") == "1 + z^2"
    v = trefoil.jones_at_level(2)
    assert abs(v - (-1)) < 1e-9
    again = dx.LinkDiagram.from_json(
        '{"components": 1, "crossings": ['
        '{"sign": -1, "arcs": [1, 2, 4, 3]},'
        '{"sign": -1, "arcs": [3, 4, 6, 5]},'
        '{"sign": -1, "arcs": [5, 6, 2, 1]}]}'
    )
    assert again.invariant("jones") == trefoil.invariant("jones")
    assert "3 crossings" in repr(again)

    print("smoke test passed: all bindings answered correctly")


if __name__ == "__main__":
    main()
