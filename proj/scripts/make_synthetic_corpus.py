#!/usr/bin/env python3
"""Writes a small synthetic corpus in the SemEval 2010 Task 8 file format.

Each directed relation has a few cue phrases that link the two entity
mentions; direction is encoded by which mention comes first. Filler words
around the mentions vary per sentence. The output is fixed by --seed.
"""
import argparse
import random

NOUNS = [
    "storm", "flood", "virus", "fever", "engine", "driver", "hammer", "carpenter",
    "factory", "car", "baker", "bread", "box", "apple", "bottle", "wine", "river",
    "village", "letter", "city", "tree", "branch", "wheel", "bicycle", "team",
    "player", "flock", "bird", "book", "war", "article", "election", "student",
    "school", "fire", "smoke", "pilot", "plane", "author", "novel", "drawer",
    "spoon", "cake", "oven", "museum", "painting", "ship", "harbor", "crowd", "fan",
]

# cue phrases for the (e1,e2) reading of each family; (e2,e1) swaps the roles
CUES = {
    "Cause-Effect": ["caused the", "led to the", "triggered a"],
    "Instrument-Agency": ["was used by the", "was handled by a", "served the"],
    "Product-Producer": ["was made by the", "was produced in the", "came from the"],
    "Content-Container": ["was inside the", "was packed in a", "sat within the"],
    "Entity-Origin": ["originated from the", "was taken out of the", "emerged from a"],
    "Entity-Destination": ["was sent into the", "moved toward the", "was put into a"],
    "Component-Whole": ["is part of the", "belongs inside the", "is a piece of the"],
    "Member-Collection": ["joined the", "is one of the", "was counted in the"],
    "Message-Topic": ["discussed the", "was about the", "described the"],
}
REVERSE_CUES = {
    "Cause-Effect": ["was caused by the", "resulted from the", "followed the"],
    "Instrument-Agency": ["used the", "handled a", "relied on the"],
    "Product-Producer": ["made the", "produced a", "baked the"],
    "Content-Container": ["held the", "contained a", "stored the"],
    "Entity-Origin": ["was the source of the", "released a", "gave off the"],
    "Entity-Destination": ["received the", "took in a", "welcomed the"],
    "Component-Whole": ["includes the", "has a", "is built around the"],
    "Member-Collection": ["consists of the", "gathered the", "counts a"],
    "Message-Topic": ["was covered by the", "was the subject of the", "appeared in a"],
}
OTHER_CUES = ["was near the", "and the", "was seen beside a", "looked at the"]
OPENERS = ["", "yesterday", "in the end", "as expected", "it seems", "last year"]
CLOSERS = ["", "today", "again", "last week", "in the morning", "without warning"]


def sentence(rng, label):
    e1, e2 = rng.sample(NOUNS, 2)
    if label == "Other":
        cue = rng.choice(OTHER_CUES)
    else:
        family, direction = label[:-7], label[-7:]
        cue = rng.choice(CUES[family] if direction == "(e1,e2)" else REVERSE_CUES[family])
    opener = rng.choice(OPENERS)
    closer = rng.choice(CLOSERS)
    words = [w for w in [opener, "the", f"<e1>{e1}</e1>", cue, f"<e2>{e2}</e2>", closer] if w]
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=400)
    ap.add_argument("--seed", type=int, default=2016)
    ap.add_argument("--start-id", type=int, default=1)
    ap.add_argument("out")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    labels = ["Other"] + [f + d for f in CUES for d in ("(e1,e2)", "(e2,e1)")]
    with open(args.out, "w") as f:
        for i in range(args.count):
            label = rng.choice(labels)
            f.write(f'{args.start_id + i}\t"{sentence(rng, label)}"\n{label}\nComment:\n\n')


if __name__ == "__main__":
    main()
