"""Figures written next to CLI reports (non-interactive Agg backend)."""

from __future__ import annotations

from collections import Counter
from math import gcd
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def low_index_counts(tables, path, title: str = ""):
    counts = Counter(t.index for t in tables)
    xs = sorted(counts)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(xs, [counts[x] for x in xs], color="#4c72b0")
    ax.set_xlabel("index")
    ax.set_ylabel("subgroups")
    ax.set_yscale("log")
    ax.set_xticks(xs)
    ax.set_title(title or "subgroups by index")
    return _save(fig, path)


def cycle_type_bars(cycle_types: dict, path, title: str = ""):
    """One group of bars per generator: number of cycles of each length."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = sorted(cycle_types)
    lengths = sorted({n for ct in cycle_types.values() for n in ct})
    width = 0.8 / max(len(names), 1)
    for k, name in enumerate(names):
        ct = cycle_types[name]
        ax.bar([n + k * width for n in lengths], [ct.get(n, 0) for n in lengths], width, label=name)
    ax.set_xlabel("cycle length")
    ax.set_ylabel("cycles")
    ax.set_xticks(lengths)
    ax.legend()
    ax.set_title(title or "generator cycle types")
    return _save(fig, path)


def ratio_curve(sizes, ratios, epsilon, path, title: str = ""):
    """Max Følner ratio of each breadth-first prefix against the threshold."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(sizes, [float(q) for q in ratios], marker=".", lw=1)
    ax.axhline(float(epsilon), color="#c44e52", ls="--", label=f"epsilon = {epsilon}")
    ax.set_xlabel("|F|")
    ax.set_ylabel("max ratio")
    ax.legend()
    ax.set_title(title or "Følner ratios of breadth-first prefixes")
    return _save(fig, path)


def bs_orders(quotients, n: int, path):
    """Order of the image of s against quotient index; even orders would be violations."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    xs = [i for i, _, _ in quotients]
    ys = [o for _, o, _ in quotients]
    bad = [(i, o) for i, o in zip(xs, ys) if gcd(o, n) != 1]
    ax.scatter(xs, ys, color="#4c72b0", label="image of s")
    if bad:
        ax.scatter(*zip(*bad), color="#c44e52", label="shares a factor with n")
    ax.set_xlabel("index")
    ax.set_ylabel("order of s")
    ax.legend()
    ax.set_title(f"BS(1,{n}) finite quotients")
    return _save(fig, path)
