"""psi/kappa intersection numbers on moduli of stable curves."""
from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

log = logging.getLogger(__name__)

CACHE_SCHEMA = "wk-cache-v1"


class UnstableError(ValueError):
    pass


class CacheVersionError(ValueError):
    pass


def _dfact(n: int) -> int:
    """Double factorial with (-1)!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _key(g: int, a) -> tuple:
    return g, tuple(sorted(a))


def is_stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


_MEMO: dict = {}
_LOCK = threading.Lock()


def psi_integral(g: int, a) -> Fraction:
    """<tau_{a_1} ... tau_{a_n}>_g by the DVV recursion."""
    g, a = _key(g, a)
    if not is_stable(g, len(a)):
        raise UnstableError(f"(g, n) = ({g}, {len(a)}) is unstable")
    return _dvv(g, a)


def _dvv(g: int, a: tuple) -> Fraction:
    hit = _MEMO.get((g, a))
    if hit is not None:
        return hit
    val = _dvv_compute(g, a)
    with _LOCK:
        _MEMO[(g, a)] = val
    return val


def _safe(g: int, a) -> Fraction:
    a = tuple(sorted(a))
    if g < 0 or not is_stable(g, len(a)):
        return Fraction(0)
    return _dvv(g, a)


def _dvv_compute(g: int, a: tuple) -> Fraction:
    n = len(a)
    if any(x < 0 for x in a) or sum(a) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and a == (0, 0, 0):
        return Fraction(1)
    if g == 1 and a == (1,):
        return Fraction(1, 24)
    top = a[-1]
    if top == 0:
        return Fraction(0)
    k = top - 1
    rest = a[:-1]
    total = Fraction(0)
    for j, d in enumerate(rest):
        new = rest[:j] + (d + k,) + rest[j + 1:]
        total += Fraction(_dfact(2 * k + 2 * d + 1), _dfact(2 * d - 1)) * _safe(g, new)
    half = Fraction(0)
    m = len(rest)
    for r in range(k):
        s = k - 1 - r
        w = _dfact(2 * r + 1) * _dfact(2 * s + 1)
        acc = _safe(g - 1, rest + (r, s))
        for g1 in range(g + 1):
            g2 = g - g1
            for size in range(m + 1):
                for I in combinations(range(m), size):
                    left = tuple(rest[i] for i in I)
                    right = tuple(rest[i] for i in range(m) if i not in I)
                    acc += _safe(g1, left + (r,)) * _safe(g2, right + (s,))
        half += w * acc
    total += half / 2
    return total / _dfact(2 * k + 3)


def reduce_string_dilaton(g: int, a) -> list[tuple[Fraction, tuple]]:
    """One string or dilaton step: value(g, a) = sum c * value(g, a')."""
    g, a = _key(g, a)
    n = len(a)
    if (g, a) in ((0, (0, 0, 0)), (1, (1,))):
        return [(Fraction(1), (g, a))]
    if 0 in a and is_stable(g, n - 1):
        i = a.index(0)
        rest = a[:i] + a[i + 1:]
        out = []
        for j, d in enumerate(rest):
            if d:
                out.append((Fraction(1), _key(g, rest[:j] + (d - 1,) + rest[j + 1:])))
        return out
    if 1 in a and is_stable(g, n - 1):
        i = a.index(1)
        rest = a[:i] + a[i + 1:]
        return [(Fraction(2 * g - 2 + n - 1), _key(g, rest))]
    return [(Fraction(1), (g, a))]


def psi_integral_reduced(g: int, a) -> Fraction:
    """Evaluate by string/dilaton reduction first, DVV only on reduced keys."""
    g, a = _key(g, a)
    if not is_stable(g, len(a)):
        raise UnstableError(f"(g, n) = ({g}, {len(a)}) is unstable")
    if sum(a) != 3 * g - 3 + len(a):
        return Fraction(0)
    steps = reduce_string_dilaton(g, a)
    if steps == [(Fraction(1), (g, a))]:
        return _dvv_compute(g, a)
    return sum((c * psi_integral_reduced(*key) for c, key in steps), Fraction(0))


def stable_keys(max_dim: int):
    """All (g, a) with 3g-3+n <= max_dim, stable, and sum(a) = 3g-3+n."""
    for g in range(max_dim // 3 + 2):
        for n in range(0, max_dim - 3 * g + 4):
            dim = 3 * g - 3 + n
            if dim < 0 or dim > max_dim or not is_stable(g, n):
                continue
            for parts in _multisets(dim, n):
                yield g, parts


def _multisets(total: int, n: int, low: int = 0):
    if n == 0:
        if total == 0:
            yield ()
        return
    for first in range(low, total // n + 1):
        for rest in _multisets(total - first, n - 1, first):
            yield (first,) + rest


# kappa ---------------------------------------------------------------------

_KMEMO: dict = {}


def kappa_to_psi(psi, kappa, g: int) -> Fraction:
    """int over M_{g,n} of prod psi_i^{psi_i} * prod kappa_{b}; n = len(psi).

    Uses kappa_b = pi_* psi_{n+1}^(b+1) and pi^* kappa_b = kappa_b - psi_{n+1}^b.
    """
    psi = tuple(sorted(psi))
    kappa = tuple(sorted(kappa))
    n = len(psi)
    if not is_stable(g, n):
        raise UnstableError(f"(g, n) = ({g}, {n}) is unstable")
    if any(b < 1 for b in kappa):
        raise ValueError("kappa indices must be >= 1")
    if sum(psi) + sum(kappa) != 3 * g - 3 + n:
        return Fraction(0)
    if not kappa:
        return psi_integral(g, psi)
    key = (g, psi, kappa)
    hit = _KMEMO.get(key)
    if hit is not None:
        return hit
    last, others = kappa[-1], kappa[:-1]
    m = len(others)
    total = Fraction(0)
    for size in range(m + 1):
        for S in combinations(range(m), size):
            extra = sum(others[i] for i in S)
            rest = tuple(others[i] for i in range(m) if i not in S)
            total += (-1) ** size * kappa_to_psi(psi + (last + 1 + extra,), rest, g)
    with _LOCK:
        _KMEMO[key] = total
    return total


@dataclass
class KappaPsiMonomial:
    psi: dict = field(default_factory=dict)   # marking -> exponent
    kappa: tuple = ()

    @property
    def degree(self) -> int:
        return sum(self.psi.values()) + sum(self.kappa)

    def integrate(self, g: int, n: int) -> Fraction:
        exps = [self.psi.get(j, 0) for j in range(1, n + 1)]
        return kappa_to_psi(exps, self.kappa, g)

    @classmethod
    def parse(cls, text: str) -> "KappaPsiMonomial":
        """'1' | 'psi:a1,a2,..' | 'kappa:k1,..' | 'psi:..;kappa:..'."""
        text = text.strip()
        mono = cls()
        if text in ("", "1"):
            return mono
        for part in text.split(";"):
            kind, _, body = part.partition(":")
            vals = [int(x) for x in body.split(",") if x.strip()]
            if kind == "psi":
                mono.psi = {i + 1: v for i, v in enumerate(vals) if v}
            elif kind == "kappa":
                mono.kappa = tuple(sorted(vals))
            else:
                raise ValueError(f"unknown class {kind!r}")
        return mono

    def label(self) -> str:
        parts = []
        if self.psi:
            parts.append("psi:" + ",".join(f"{j}^{e}" for j, e in sorted(self.psi.items())))
        if self.kappa:
            parts.append("kappa:" + ",".join(map(str, self.kappa)))
        return ";".join(parts) or "1"


# persistence ---------------------------------------------------------------

def _fmt_key(key) -> str:
    g, a = key
    return f"{g}:" + ",".join(map(str, a))


def _parse_key(s: str) -> tuple:
    g, _, body = s.partition(":")
    return int(g), tuple(int(x) for x in body.split(",") if x)


@dataclass
class CacheStore:
    path: Path
    entries: dict = field(default_factory=dict)
    dirty: bool = False

    @classmethod
    def default(cls) -> "CacheStore":
        env = os.environ.get("MIRRORFORGE_CACHE")
        return cls(Path(env) if env else Path.home() / ".cache" / "mirrorforge" / "wk.json")

    def load(self) -> str:
        if not self.path.exists():
            log.warning("cache file %s not found; starting empty", self.path)
            self.entries = {}
            return "missing"
        try:
            doc = json.loads(self.path.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"cannot parse cache {self.path}: {exc}") from exc
        if doc.get("schema") != CACHE_SCHEMA:
            raise CacheVersionError(f"unsupported cache schema {doc.get('schema')!r}")
        self.entries = {_parse_key(k): Fraction(v) for k, v in doc["entries"].items()}
        self.dirty = False
        return "loaded"

    def save(self) -> str:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        doc = {"schema": CACHE_SCHEMA,
               "entries": {_fmt_key(k): str(v) for k, v in sorted(self.entries.items())}}
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        tmp.write_text(json.dumps(doc, indent=1))
        tmp.replace(self.path)
        self.dirty = False
        return "saved"

    def absorb_memo(self) -> int:
        """Copy the in-process DVV memo into the store."""
        before = len(self.entries)
        with _LOCK:
            self.entries.update(_MEMO)
        self.dirty = self.dirty or len(self.entries) != before
        return len(self.entries) - before

    def install(self) -> int:
        """Seed the in-process memo from the store."""
        with _LOCK:
            _MEMO.update(self.entries)
        return len(self.entries)


def cache_io(store: CacheStore, action: str) -> str:
    if action == "load":
        return store.load()
    if action == "save":
        return store.save()
    raise ValueError(f"unknown cache action {action!r}")


def clear_memo() -> None:
    with _LOCK:
        _MEMO.clear()
        _KMEMO.clear()
