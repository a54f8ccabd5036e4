"""Independent labeller for fixtures/corpus.jsonl.

Naive leftmost-longest scan over ASCII-punctuation-trimmed tokens; the
first match labels the sentence. Prints per-sentence labels and the class
histogram that tests/cli.rs freezes.
"""
import json
import string
import sys
from pathlib import Path

root = Path(__file__).resolve().parents[2] / "fixtures"

QUAD = ["verbal_cooperation"] * 5 + ["material_cooperation"] * 3 + ["verbal_conflict"] * 5 + ["material_conflict"] * 7


def tokens(text):
    out = []
    for w in text.split():
        w = w.lower().strip(string.punctuation)
        if w:
            out.append(w)
    return out


patterns = []
for line in (root / "dictionary.txt").read_text().splitlines():
    line = line.split("#")[0].strip()
    if not line:
        continue
    phrase, code = line.rsplit("->", 1)
    patterns.append((tokens(phrase), code.strip()))


def first_match(toks):
    for i in range(len(toks)):
        best = None
        for pat, code in patterns:
            if toks[i : i + len(pat)] == pat and (best is None or len(pat) > len(best[0])):
                best = (pat, code)
        if best:
            return best[1]
    return None


hist = {q: 0 for q in ["verbal_cooperation", "material_cooperation", "verbal_conflict", "material_conflict"]}
unlabelled = 0
for line in (root / "corpus.jsonl").read_text().splitlines():
    rec = json.loads(line)
    code = first_match(tokens(rec["text"]))
    if code is None:
        unlabelled += 1
        print(rec["id"], "-", file=sys.stderr)
        continue
    q = QUAD[int(code[:2]) - 1]
    hist[q] += 1
    print(rec["id"], code, q, file=sys.stderr)

print(json.dumps({"counts": list(hist.values()), "unlabelled": unlabelled}))
