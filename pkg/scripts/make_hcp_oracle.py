"""Freeze class polynomials from python-flint into tests/data/hcp_oracle.json.

Discriminants are found with the brute-force form oracle, so this script
shares no code with the package.
"""

import json
import sys
from pathlib import Path

import flint

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
from oracles import brute_force_forms  # noqa: E402

SCAN = 10_000
EXTRA = (-71, -87, -104, -199, -260, -311, -399, -551, -671, -719, -1151, -1303)


def main():
    polys = {}
    for n in range(3, SCAN + 1):
        d = -n
        if d % 4 in (0, 1) and len(brute_force_forms(d)) <= 3:
            polys[d] = [int(c) for c in flint.fmpz_poly.hilbert_class_poly(d).coeffs()]
    for d in EXTRA:
        polys[d] = [int(c) for c in flint.fmpz_poly.hilbert_class_poly(d).coeffs()]
    out = {"source": f"python-flint {flint.__version__} fmpz_poly.hilbert_class_poly",
           "scan": SCAN,
           "polynomials": {str(d): [str(c) for c in polys[d]] for d in sorted(polys, reverse=True)}}
    path = ROOT / "tests" / "data" / "hcp_oracle.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"{len(polys)} polynomials -> {path}")


if __name__ == "__main__":
    main()
