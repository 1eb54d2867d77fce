#!/usr/bin/env python3
"""Writes the reference corpus: instance files plus corpus.json.

Usage: gen_corpus.py OUTDIR [--seed N] [--count N]
"""
import argparse
import ast
import itertools
import json
import random
from pathlib import Path

NAMES = "abcdefghij"

# Hand-written instances kept verbatim: the minimal ones, a contradiction and
# tautologies (the cell-bound fault needs a negative row-0 step to flip).
FIXED = [
    ("a", [["a"]], [1], "a"),
    ("contra", [["a"]], [1], "a & !a"),
    ("taut", [["a"]], [2], "a | !a"),
    ("taut2", [["a", "b"]], [4], "a | !a"),
    ("xor_all", [["a"], ["b"]], [1, 2], "a & !b | !a & b"),
    ("unreach", [["a", "b"]], [5], "a | b"),
    ("zero", [["a", "b"]], [0], "a & b & !a"),
]


def random_formula(rng, names, depth):
    if depth == 0 or rng.random() < 0.25:
        v = rng.choice(names)
        return v if rng.random() < 0.7 else "!" + v
    op = rng.choice(["&", "|"])
    left = random_formula(rng, names, depth - 1)
    right = random_formula(rng, names, depth - 1)
    return f"({left} {op} {right})"


def evaluate(formula, env):
    expr = formula.replace("!", " not ").replace("&", " and ").replace("|", " or ")
    return bool(eval(expr, {}, dict(env)))


def phi(blocks, thresholds, formula, level, outer):
    """Truth of the level-`level` counting formula under an outer assignment."""
    if level == 0:
        return evaluate(formula, outer)
    count = 0
    for bits in itertools.product([False, True], repeat=len(blocks[level - 1])):
        env = dict(outer)
        env.update(zip(blocks[level - 1], bits))
        count += phi(blocks, thresholds, formula, level - 1, env)
    return count >= thresholds[level - 1]


def level_count(blocks, thresholds, formula, level, outer):
    count = 0
    for bits in itertools.product([False, True], repeat=len(blocks[level - 1])):
        env = dict(outer)
        env.update(zip(blocks[level - 1], bits))
        count += phi(blocks, thresholds, formula, level - 1, env)
    return count


def shape(formula):
    """Binary tree of the formula; equal shapes share an encoding."""
    expr = formula.replace("!", " not ").replace("&", " and ").replace("|", " or ")

    def walk(node):
        if isinstance(node, ast.Name):
            return node.id
        if isinstance(node, ast.UnaryOp):
            return ("!", walk(node.operand))
        op = "&" if isinstance(node.op, ast.And) else "|"
        tree = walk(node.values[0])
        for v in node.values[1:]:
            tree = (op, tree, walk(v))
        return tree

    return walk(ast.parse(expr.strip(), mode="eval").body)


def text(blocks, thresholds, formula):
    lines = [f"blocks {len(blocks)}"]
    for i, (b, m) in enumerate(zip(blocks, thresholds), start=1):
        lines.append(f"block {i} vars {' '.join(b)} threshold {m}")
    lines.append(f"formula {formula}")
    return "\n".join(lines) + "\n"


def choose_k(blocks):
    total = sum(len(b) + 1 for b in blocks)
    if len(blocks) <= 1 and total <= 3:
        return 3
    if len(blocks) <= 2 and total <= 5:
        return 2
    return 1


def generate(rng, count):
    out = []
    seen = set()
    for name, blocks, thresholds, formula in FIXED:
        body = text(blocks, thresholds, formula)
        seen.add((tuple(map(len, blocks)), tuple(thresholds), shape(formula)))
        out.append((name, blocks, body))
    kinds = ["trivial", "tight", "unachievable", "tight", "random"]
    attempt = 0
    while len(out) < count:
        attempt += 1
        n = rng.choice([1, 1, 2, 2, 3])
        sizes = [rng.randint(1, 3) for _ in range(n)]
        if n == 3:
            sizes = [rng.randint(1, 2) for _ in range(n)]
        names = iter(NAMES)
        blocks = [[next(names) for _ in range(l)] for l in sizes]
        flat = [v for b in blocks for v in b]
        formula = random_formula(rng, flat, rng.randint(1, 3))
        thresholds = [0] * n
        kind = kinds[attempt % len(kinds)]
        # fix thresholds bottom-up so the chosen kind applies at the outer level
        for level in range(1, n + 1):
            size = 2 ** len(blocks[level - 1])
            thresholds[level - 1] = rng.randint(0, size)
        top = 2 ** len(blocks[-1])
        if kind == "trivial":
            thresholds[-1] = 0
        elif kind == "unachievable":
            thresholds[-1] = top + 1
        elif kind == "tight":
            c = level_count(blocks, thresholds, formula, n, {})
            thresholds[-1] = c if (c > 0 and rng.random() < 0.5) else min(c + 1, top + 1)
        body = text(blocks, thresholds, formula)
        key = (tuple(map(len, blocks)), tuple(thresholds), shape(formula))
        if key in seen:
            continue
        seen.add(key)
        out.append((f"r{len(out):02d}_{kind}", blocks, body))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir")
    ap.add_argument("--seed", type=int, default=20261018)
    ap.add_argument("--count", type=int, default=56)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, blocks, body in generate(rng, args.count):
        file = f"{name}.cqbf"
        (outdir / file).write_text(body)
        entries.append({"file": file, "k": choose_k(blocks)})
    doc = {"seed": args.seed % 1000, "instances": entries}
    (outdir / "corpus.json").write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
