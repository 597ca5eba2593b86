"""Write longitude/colatitude value grids of one member per family for external plotting."""

import argparse
from pathlib import Path

from cubicball.cli import main as cli_main
from cubicball.cli import cubic_to_json, dumps
from cubicball.families import CanonicalForm, Form

EXAMPLES = {
    Form.A: (),
    Form.B: (0.2, 0.1),
    Form.C: (0.1,),
    Form.D: (),
    Form.E: (-0.3,),
    Form.F: (0.1, 0.7),
    Form.G: (0.1, 0.2, 0.3, 0.4),
    Form.H: (0.5, 1.0, 2.0),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="contours")
    ap.add_argument("--resolution", type=int, default=120)
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for case, params in EXAMPLES.items():
        cubic = out / f"case_{case.value.lower()}.json"
        cubic.write_text(dumps(cubic_to_json(CanonicalForm(case, params).cubic())) + "\n")
        grid = out / f"case_{case.value.lower()}.csv"
        cli_main(["contour", "--input", str(cubic), "--resolution", str(args.resolution), "--output", str(grid)])
        print(grid)


if __name__ == "__main__":
    main()
