"""Name-keyed registries for pluggable adapters (model backends, data sources)."""

from __future__ import annotations


class RegistryError(KeyError):
    """Duplicate registration or lookup of an unregistered name."""

    def __str__(self):  # KeyError quotes its payload; keep messages readable
        return self.args[0] if self.args else ""


class Registry:
    """A named map of adapters with explicit duplicate/missing errors."""

    def __init__(self, kind: str):
        self.kind = kind
        self._items = {}

    def register(self, name: str, adapter) -> None:
        if name in self._items:
            raise RegistryError(f"{self.kind} '{name}' is already registered")
        self._items[name] = adapter

    def get(self, name: str):
        try:
            return self._items[name]
        except KeyError:
            known = ", ".join(sorted(self._items)) or "none"
            raise RegistryError(
                f"unregistered {self.kind} '{name}' (registered: {known})"
            ) from None

    def names(self) -> list:
        return sorted(self._items)

    def clear(self) -> None:
        self._items.clear()
