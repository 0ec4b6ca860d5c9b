"""Message catalogues for console output.

``en.json`` is the reference catalogue; any other language only needs the
keys it translates and falls back to English for the rest.
"""

import json
import os

DEFAULT_LANG = "en"

_catalogues: list[dict] = []


def _i18n_dir() -> str:
    return os.path.dirname(os.path.abspath(__file__))


def _load_catalogue(lang: str) -> dict:
    with open(os.path.join(_i18n_dir(), f"{lang}.json"), encoding="utf-8") as f:
        return json.load(f)


def get_available_langs() -> list[str]:
    return sorted(f[:-5] for f in os.listdir(_i18n_dir()) if f.endswith(".json"))


def init(lang: str = DEFAULT_LANG) -> None:
    """Load ``lang`` in front of the English catalogue; unknown codes exit with the available ones."""
    global _catalogues
    available = get_available_langs()
    if lang not in available:
        raise SystemExit(f"Unknown language: '{lang}'. Available: {', '.join(available)}")
    _catalogues = [_load_catalogue(lang)]
    if lang != DEFAULT_LANG:
        _catalogues.append(_load_catalogue(DEFAULT_LANG))


def _lookup(catalogue: dict, key: str) -> str | None:
    value = catalogue
    for part in key.split("."):
        if not isinstance(value, dict) or part not in value:
            return None
        value = value[part]
    return value if isinstance(value, str) else None


def t(key: str, **kwargs) -> str:
    """Format the message for a dotted key; the key itself when no catalogue has it."""
    message = next((m for m in (_lookup(c, key) for c in _catalogues) if m is not None), key)
    if not kwargs:
        return message
    try:
        return message.format(**kwargs)
    except (KeyError, IndexError, ValueError):
        return message
