"""Anomaly equation on M_2 paired with each degree-2 kappa monomial.

Also re-derives the split-term factor, which the genus-one checks cannot see.
"""
import json

from mirrorforge import anomaly
from mirrorforge.intersections import KappaPsiMonomial
from mirrorforge.report import jsonable

ORDER = 12

conv = anomaly.resolve_conventions(ORDER, genus_two=True)
print("conventions:", json.dumps(jsonable(conv), indent=1))

for kappa in ((1, 1), (2,)):
    terms = anomaly.hae_terms(2, (), KappaPsiMonomial({}, kappa), ORDER)
    rep = anomaly.hae_check(2, (), KappaPsiMonomial({}, kappa), order=ORDER)
    fitted = {f"X1^{a} L^{b}": str(c) for (a, b), c in sorted(rep.fitted.terms.items())}
    print(f"\nkappa {kappa}: pass={rep.passed}")
    print("  fitted P^2 *", fitted)
    for name in ("lhs", "dilaton", "loop", "split"):
        print(f"  {name:8s}", [str(c) for c in terms[name].coeffs[:6]])
