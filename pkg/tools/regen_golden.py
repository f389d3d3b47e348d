"""Regenerate the golden derivation logs and corpus normal forms under tests/golden/.

Run after an intentional change to the rewrite strategy, then review the diff:

    python tools/regen_golden.py
"""

import json
from pathlib import Path

from tagcalc.derivations import DERIVATIONS, run_derivation
from tagcalc.dsl import parse, print_expr
from tagcalc.rewrite import MODES, normalize
from tagcalc.corpus import load_corpus

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def derivation_record(name: str, mode: str) -> dict:
    return run_derivation(name, mode).to_json()


def corpus_record() -> list[dict]:
    out = []
    for src in load_corpus():
        e = parse(src)
        row = {"source": src, "printed": print_expr(e)}
        for mode in MODES:
            nf, rep = normalize(e, mode)
            row[mode] = {"normal": print_expr(nf), "flags": rep.flags}
        out.append(row)
    return out


def write(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name in DERIVATIONS:
        for mode in MODES:
            write(GOLDEN / f"{name}.{mode}.json", derivation_record(name, mode))
    write(GOLDEN / "corpus.json", corpus_record())
    print(f"wrote {len(DERIVATIONS) * len(MODES) + 1} files to {GOLDEN}")


if __name__ == "__main__":
    main()
