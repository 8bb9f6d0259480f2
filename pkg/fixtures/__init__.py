"""
fixtures/__init__.py — Bundled example models.

    from fixtures import load_fixture
    doc = load_fixture("e1")

e1 and e2 are the two reference systems; every `mutant_*` model breaks
exactly one property of e1 or of a minimal sender/receiver pair.
"""

from pathlib import Path

FIXTURE_DIR = Path(__file__).parent


def fixture_names() -> list[str]:
    """Names of the bundled models, without the .vpn suffix."""
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.vpn"))


def fixture_path(name: str) -> Path:
    path = FIXTURE_DIR / f"{name}.vpn"
    if not path.exists():
        raise ValueError(f"Unknown fixture '{name}'. Available: {', '.join(fixture_names())}")
    return path


def load_fixture(name: str):
    from model_format import load_model
    return load_model(fixture_path(name))


def fixtures() -> dict:
    """{"e1": doc, "e2": doc, "mutants": {name: doc}}"""
    names = fixture_names()
    return {
        "e1": load_fixture("e1"),
        "e2": load_fixture("e2"),
        "mutants": {n: load_fixture(n) for n in names if n.startswith("mutant_")},
    }
