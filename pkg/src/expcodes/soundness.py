"""Result container for list decoders and a process-wide tally of soundness checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["SoundnessError", "SoundnessTally", "TALLY", "certify", "ListDecodeResult"]


class SoundnessError(AssertionError):
    """A decoder was about to return a word outside the code or outside the radius."""


@dataclass
class SoundnessTally:
    checked: int = 0
    violations: int = 0

    def reset(self) -> None:
        self.checked = 0
        self.violations = 0


TALLY = SoundnessTally()


def certify(ok: bool, what: str) -> None:
    TALLY.checked += 1
    if not ok:
        TALLY.violations += 1
        raise SoundnessError(what)


@dataclass(frozen=True)
class ListDecodeResult:
    codewords: tuple[np.ndarray, ...]
    best_effort: bool  # some completeness precondition failed
    preconditions: dict[str, bool] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.codewords)

    def __iter__(self):
        return iter(self.codewords)

    def as_set(self) -> set[bytes]:
        return {np.asarray(c, dtype=np.int64).tobytes() for c in self.codewords}
