"""Independent reference values for the C++ test suite.

Run from the repository root: python3 tests/oracles/derive.py
Writes golden files under tests/data/ and prints scalar values that are
frozen as literals in the tests.
"""
import hashlib
import itertools
import json
import math
from fractions import Fraction
from pathlib import Path

from scipy.stats import norm

DATA = Path(__file__).resolve().parent.parent / "data"

LABELS = [
    "admiration", "amusement", "anger", "annoyance", "approval", "caring", "confusion", "curiosity",
    "desire", "disappointment", "disapproval", "disgust", "embarrassment", "excitement", "fear",
    "gratitude", "grief", "joy", "love", "nervousness", "optimism", "pride", "realization", "relief",
    "remorse", "sadness", "surprise", "neutral",
]

QUESTION = ("What is the distance in miles between Fargo, North Dakota and Seattle, Washington? "
            "Respond with your best single numeric estimate in miles.")

PERSONA = [
    ("Age", "34"), ("Gender", "Female"), ("Occupation", "Engineer"), ("Personality Traits", "Innovative"),
    ("Communication Style", "Direct"), ("Interests and Hobbies", "Cooking"),
    ("Educational Background", "Bachelor"), ("Cultural Background", "Eastern"),
    ("Language Proficiency", "Mandarin"), ("Technology Savviness", "Expert"),
    ("Preferred Communication Medium", "Text"), ("Lifestyle", "Active"),
    ("Values and Beliefs", "Humanism"), ("Relationship Status", "Married"),
    ("Economic Status", "Middle income"), ("Health and Wellness", "Healthy"),
    ("Time Availability", "Part-time"), ("Problem-solving Approach", "Creative"),
]

TWELVE = [1180.625, 1236.25, 1290.875, 1335.5, 1372.125, 1401.75, 1433.375, 1468.25, 1497.0625, 1532.75, 1588.5, 1642.3125]
LO, HI = Fraction(1411), Fraction(1441)


def field(s: str) -> bytes:
    b = s.encode()
    return str(len(b)).encode() + b":" + b + b";"


def sha(parts) -> str:
    return hashlib.sha256(b"".join(field(p) for p in parts)).hexdigest()


def persona_id() -> str:
    return sha([x for pair in PERSONA for x in pair])[:16]


def persona_text() -> str:
    return "".join(f"{k}: {v}\n" for k, v in PERSONA)


def prompt_hashes():
    return {
        "base_r0": sha(["base", "", "", QUESTION, "0"]),
        "base_r1": sha(["base", "", "", QUESTION, "1"]),
        "emotional_only_joy_r0": sha(["emotional_only", "", "joy", QUESTION, "0"]),
        "attributes_only": sha(["attributes_only", persona_text(), "", QUESTION, "0"]),
        "full_context_love": sha(["full_context", persona_text(), "love", QUESTION, "0"]),
    }


def median(sorted_vals):
    n = len(sorted_vals)
    return sorted_vals[n // 2] if n % 2 else (sorted_vals[n // 2 - 1] + sorted_vals[n // 2]) / 2


def exhaustive(values, k, agg):
    vals = sorted(Fraction(v) for v in values)
    hits = total = 0
    for combo in itertools.combinations(vals, k):
        x = sum(combo) / k if agg == "mean" else median(list(combo))
        assert x != LO and x != HI, "tie on a range boundary"
        hits += LO <= x <= HI
        total += 1
    return hits, total


def normalize(text: str) -> str:
    out, pending = [], False
    for ch in text:
        if ch in " \t\n\r\v\f":
            pending = bool(out)
            continue
        if ord(ch) < 0x20 or 0x7F <= ord(ch) <= 0x9F:
            continue
        if pending:
            out.append(" ")
            pending = False
        out.append(ch)
    return "".join(out)


def training_goldens():
    e2t, t2e, skipped = [], [], []
    for n, line in enumerate((DATA / "goemotions_sample.tsv").read_text(encoding="utf-8").split("\n")[:-1], 1):
        parts = line.split("\t")
        try:
            assert len(parts) == 3
            labels = sorted({int(x) for x in parts[1].split(",")})
            assert labels and all(0 <= x < 28 for x in labels)
        except (AssertionError, ValueError):
            skipped.append(n)
            continue
        text = normalize(parts[0])
        names = ", ".join(LABELS[i] for i in labels)
        e2t.append({"prompt": "### Instruction: Write a short comment expressing the following emotion(s): "
                              f"{names}.\n### Response:", "completion": text, "labels": labels})
        t2e.append({"prompt": "### Instruction: Name the emotion(s) expressed in the following comment.\n"
                              f"### Comment: {text}\n### Response:", "completion": names, "labels": labels})
    dump = lambda rows: "".join(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n" for r in rows)
    (DATA / "train_emotion_to_text.golden.jsonl").write_text(dump(e2t), encoding="utf-8")
    (DATA / "train_text_to_emotion.golden.jsonl").write_text(dump(t2e), encoding="utf-8")
    return len(e2t), skipped


def compare_golden():
    def load(name):
        rows = (DATA / name).read_text().splitlines()[1:]
        return [(int(r.split(",")[0]), float(r.split(",")[1])) for r in rows]

    def optimal(points, eps):
        best = max(a for _, a in points)
        return min(k for k, a in points if a >= best - eps - 1e-12), best

    a, b = load("curve_a.csv"), load("curve_b.csv")
    bmap = dict(b)
    out = "k,curve_a,curve_b,delta\n"
    for k, acc in a:
        if k in bmap:
            out += f"{k},{acc:.4f},{bmap[k]:.4f},{bmap[k] - acc:.4f}\n"
    (ka, ma), (kb, mb) = optimal(a, 0.01), optimal(b, 0.01)
    out += f"k_star,{ka},{kb},{kb - ka}\n"
    out += f"max_accuracy,{ma:.4f},{mb:.4f},{mb - ma:.4f}\n"
    out += "epsilon,0.01,0.01,\n"
    (DATA / "compare_a_b.golden.txt").write_text(out)


def main():
    print("closed-form normal(1426, 300) mean accuracy:")
    for k in (1, 100, 900):
        print(f"  k={k}: {2 * norm.cdf(15 * math.sqrt(k) / 300) - 1:.6f}")
    print("twelve-value exhaustive hits (mean, median):")
    for k in range(1, 13):
        hm, total = exhaustive(TWELVE, k, "mean")
        hd, _ = exhaustive(TWELVE, k, "median")
        print(f"  k={k}: C={total} mean={hm} median={hd}")
    print(f"balanced per label over 15064 personas, 28 labels: {15064 // 28} rem {15064 % 28}")
    print(f"balanced replicate count for emotional_only at n=1064: {math.ceil(1064 / 28)}")
    print(f"2300 km in miles: {2300 * 0.621371:.6f}")
    print(f"persona id: {persona_id()}")
    for name, h in prompt_hashes().items():
        print(f"prompt hash {name}: {h}")
    n, skipped = training_goldens()
    print(f"training examples: {n}, skipped lines {skipped}")
    compare_golden()


if __name__ == "__main__":
    main()
