"""The shipped DSL expression corpus (``data/corpus.txt``)."""

from importlib.resources import files


def load_corpus() -> list[str]:
    text = files("tagcalc").joinpath("data/corpus.txt").read_text()
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
