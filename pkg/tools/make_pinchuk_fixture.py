#!/usr/bin/env python3
"""Generate fixtures/pinchuk.map from Pinchuk's published construction.

Source: S. Pinchuk, "A counterexample to the strong real Jacobian
conjecture", Math. Z. 217 (1994), 1-4.  The construction there gives a
polynomial map (p, q) of the real plane, of degrees 10 and 25, whose
Jacobian determinant is everywhere positive yet which is not injective.

With the auxiliary polynomials

    t = x*y - 1,   h = t*(x*t + 1),   f = (x*t + 1)^2 * (t^2 + y)

the map is

    p = f + h
    q = -t^2 - 6*t*h*(h+1)
        - (170*f*h + 91*h^2 + 195*f*h^2 + 69*h^3 + 75*f*h^3 + (75/4)*h^4)

and its Jacobian determinant satisfies the exact identity

    jac(p, q) = t^2 + (t + f*(13 + 15*h))^2 + f^2

which is positive everywhere (on t = 0 the map forces f = y and
t = -1, so the three squares cannot vanish together).  This script
rebuilds the map in exact rational arithmetic, machine-checks the
identity and the degrees, runs a collision sanity check, and writes the
fixture file.  It is deterministic; re-running reproduces the same file.
"""

import json
import pathlib
import sys
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from degreelab.polycore import IntervalBox, Poly, parse_poly, poly_to_string
from degreelab.mapforms import PolyMap, jacobian_det, keller_check
from degreelab.injectlab import CollisionConfig, collision_search

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "pinchuk.map"

SUGGESTED_BOX = "-2:2,-2:2"
SUGGESTED_SAMPLES = 20000


def build_map() -> tuple[Poly, Poly]:
    x = Poly.var(2, 1)
    y = Poly.var(2, 2)
    one = Poly.const(2, 1)
    t = x * y - one
    xt1 = x * t + one
    h = t * xt1
    f = xt1 ** 2 * (t * t + y)
    p = f + h
    q = (
        (t * t).scale(-1)
        - (t * h * (h + one)).scale(6)
        - (f * h).scale(170)
        - (h ** 2).scale(91)
        - (f * h ** 2).scale(195)
        - (h ** 3).scale(69)
        - (f * h ** 3).scale(75)
        - (h ** 4).scale(Fraction(75, 4))
    )
    # machine-check the published determinant identity, exactly
    jac = p.diff(1) * q.diff(2) - p.diff(2) * q.diff(1)
    target = t * t + (t + f * (Poly.const(2, 13) + h.scale(15))) ** 2 + f * f
    assert jac == target, "determinant identity failed; construction mistyped"
    assert p.total_degree() == 10 and q.total_degree() == 25
    return p, q


def main() -> int:
    p, q = build_map()
    F = PolyMap([p, q])
    assert keller_check(F).kind == "nonconstant"

    p_text = poly_to_string(p)
    q_text = poly_to_string(q)
    # round-trip: the fixture strings must parse back to the same map
    assert parse_poly(p_text, 2) == p and parse_poly(q_text, 2) == q

    print("searching for a collision witness (sanity check)...")
    witness = collision_search(
        F, IntervalBox.from_bounds([(-2.0, 2.0), (-2.0, 2.0)]),
        CollisionConfig(samples=SUGGESTED_SAMPLES, prune_boxes=0, max_pairs=300))
    assert witness is not None, "no collision found; fixture would be useless"
    print(f"  witness separation {witness.separation:.3f}, "
          f"residual {witness.residual:.3e}")

    doc = {
        "name": "pinchuk-counterexample",
        "n": 2,
        "components": [p_text, q_text],
        "metadata": {
            "source": ("S. Pinchuk, 'A counterexample to the strong real "
                       "Jacobian conjecture', Math. Z. 217 (1994), 1-4; "
                       "rebuilt and machine-verified by "
                       "tools/make_pinchuk_fixture.py"),
            "expected": ("Jacobian determinant everywhere positive "
                         "(equals t^2 + (t + f*(13+15*h))^2 + f^2 for "
                         "t = x1*x2 - 1, h = t*(x1*t + 1), "
                         "f = (x1*t + 1)^2*(t^2 + x2)) but the map is "
                         "not injective"),
            "degrees": [10, 25],
            "suggested_collision_box": SUGGESTED_BOX,
            "suggested_collision_samples": SUGGESTED_SAMPLES,
        },
    }
    OUT.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
