"""Reversible process calculus with truly concurrent semantics, bisimilarities, and modal logics."""
from importlib import resources

__version__ = "0.1.0"


def fixture_path(name: str) -> str:
    """Filesystem path of a bundled fixture such as ``"E.json"``."""
    return str(resources.files(__name__).joinpath("fixtures", name))
