"""Length zeta functions and their residues.

The zeta function Z(s) = sum l_k^{-s} converges for Re s > d and continues
meromorphically with simple poles at s = 1 .. d.  The residues recover the
intrinsic volumes of the difference body, giving a purely spectral route
to convex geometry.
"""

import math

from orthospec import convex, zetafns


def main() -> None:
    ellipse = convex.ellipsoid((0.0, 0.0), (1.3, 0.7))
    origin = convex.point((0.0, 0.0))
    model = zetafns.build_zeta_model(ellipse, origin)
    print(f"zeta model: d = {model.spec.dim}, splice T = {model.T:.2f}, "
          f"{model.spec.lengths.size} lengths")

    print("\nvalues on the real axis")
    for s in (3.0, 2.5, 1.5, 0.5):
        if s > model.spec.dim:
            val = zetafns.zeta_eval(model, s)
            tag = "series"
        else:
            val = zetafns.zeta_continue(model, s)
            tag = "continued"
        print(f"  Z({s:.1f}) = {val.real:+.8f}  ({tag})")

    print("\nresidues against closed forms")
    ests = zetafns.residues(model)
    per = convex.steiner(convex.ellipsoid((0.0, 0.0), (1.3, 0.7))).intrinsic[1]
    want = {1: 2.0 * per / (2.0 * math.pi) ** 2, 2: 1.0 / (2.0 * math.pi)}
    for est in ests:
        w = want[est.pole]
        print(f"  pole s = {est.pole}: residue {est.residue.real:.8f}  "
              f"predicted {w:.8f}  error bar {est.error:.2e}")

    # PoleHit guards the continuation near s = 1, 2
    try:
        zetafns.zeta_continue(model, 1.0 + 1e-12)
    except zetafns.PoleHit as exc:
        print(f"\ncontinuation at a pole raises: {exc}")


if __name__ == "__main__":
    main()
