"""Independent reference implementations the real code is tested against.

These stay deliberately naive: the dictionary oracle re-scans the text once
per term with str.find, and the metrics oracle loops over every
(example, label) pair. Neither shares code with the paths they check.
"""

from mindlens.lexicon import DisorderLabel, Lexicon, normalize_for_match


def _word_char(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("0" <= ch <= "9")


def naive_dictionary_labels(text: str, lexicon: Lexicon) -> frozenset[DisorderLabel]:
    """Per-term linear scan with inline boundary checks."""
    norm = normalize_for_match(text)
    labels: set[DisorderLabel] = set()
    for disorder, terms in lexicon.entries.items():
        for term in terms:
            start = 0
            while True:
                i = norm.find(term, start)
                if i < 0:
                    break
                end = i + len(term)
                left_ok = i == 0 or not _word_char(norm[i - 1])
                right_ok = end == len(norm) or not _word_char(norm[end])
                if left_ok and right_ok:
                    labels.add(disorder)
                    break
                start = i + 1
    if not labels:
        return frozenset({DisorderLabel.NONE})
    return frozenset(labels)


def brute_force_metrics(
    gold: list[set[str]], pred: list[set[str]], labels: tuple[str, ...]
) -> dict:
    """TP/FP/FN enumeration over every (example, label) pair."""
    tp = fp = fn = 0
    exact = 0
    per_label = {}
    for label in labels:
        ltp = lfp = lfn = 0
        for g, p in zip(gold, pred):
            if label in g and label in p:
                ltp += 1
            elif label in p:
                lfp += 1
            elif label in g:
                lfn += 1
        precision = ltp / (ltp + lfp) if ltp + lfp else 0.0
        recall = ltp / (ltp + lfn) if ltp + lfn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_label[label] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": ltp + lfn,
        }
        tp += ltp
        fp += lfp
        fn += lfn
    for g, p in zip(gold, pred):
        if g == p:
            exact += 1
    micro_p = tp / (tp + fp) if tp + fp else 0.0
    micro_r = tp / (tp + fn) if tp + fn else 0.0
    micro_f1 = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    supported = [m for m in per_label.values() if m["support"] > 0]
    return {
        "subset_accuracy": exact / len(gold) if gold else 0.0,
        "micro_precision": micro_p,
        "micro_recall": micro_r,
        "micro_f1": micro_f1,
        "macro_precision": (
            sum(m["precision"] for m in supported) / len(supported) if supported else 0.0
        ),
        "macro_recall": (
            sum(m["recall"] for m in supported) / len(supported) if supported else 0.0
        ),
        "macro_f1": sum(m["f1"] for m in supported) / len(supported) if supported else 0.0,
        "per_label": per_label,
    }
