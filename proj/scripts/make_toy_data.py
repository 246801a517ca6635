#!/usr/bin/env python3
"""Writes the bundled toy data under data/toy.

  copy.{src,tgt}         200 sentence pairs; the target is the source in upper case
  copy.src.conll         gold dependency trees of copy.src
  treebank.conll         500 synthetic sentences (wider vocabulary) for the parser
  treebank_small.conll   the first 50 sentences of treebank.conll
  treebank_{train,dev}.conll  the same 500 split 400 / 100

Sentences come from a small grammar whose prepositional phrases attach by
word: "with" + an instrument attaches to the verb, every other phrase to
the preceding noun. Output is deterministic for a given --seed.
"""

import argparse
import os
import random

COPY_LEXICON = {
    "det": ["the", "a", "some"],
    "adj": ["big", "small", "red", "old"],
    "noun": ["dog", "cat", "man", "woman", "bird", "child", "park", "house", "box", "tree"],
    "instrument": ["stick", "spoon"],
    "tverb": ["saw", "found", "liked", "chased"],
    "iverb": ["slept", "ran"],
    "prep": ["with", "near", "in"],
    "adv": ["quickly", "often"],
}

TREEBANK_LEXICON = {
    "det": ["the", "a", "some", "every", "this", "that"],
    "adj": ["big", "small", "red", "old", "happy", "quiet", "green", "young", "tall", "brown"],
    "noun": ["dog", "cat", "man", "woman", "bird", "child", "park", "house", "box", "tree",
             "boy", "girl", "river", "table", "garden", "horse", "city", "car", "book", "door"],
    "instrument": ["stick", "spoon", "knife", "telescope", "hammer", "rope"],
    "tverb": ["saw", "found", "liked", "chased", "watched", "took", "pushed", "painted"],
    "iverb": ["slept", "ran", "laughed", "waited"],
    "prep": ["with", "near", "in", "on", "behind"],
    "adv": ["quickly", "often", "slowly", "today"],
}


class Builder:
    def __init__(self):
        self.words = []
        self.heads = []
        self.labels = []

    def add(self, word, label):
        self.words.append(word)
        self.heads.append(None)
        self.labels.append(label)
        return len(self.words)  # 1-based

    def attach(self, dep, head):
        self.heads[dep - 1] = head


def noun_phrase(b, rng, lex, max_adj):
    det = b.add(rng.choice(lex["det"]), "det")
    adjs = [b.add(rng.choice(lex["adj"]), "amod") for _ in range(rng.randint(0, max_adj))]
    noun = b.add(rng.choice(lex["noun"]), None)
    for d in [det] + adjs:
        b.attach(d, noun)
    return noun


def prep_phrase(b, rng, lex, verb, last_noun):
    prep_word = rng.choice(lex["prep"])
    prep = b.add(prep_word, "case")
    det = b.add(rng.choice(lex["det"]), "det")
    if prep_word == "with" and rng.random() < 0.5:
        noun = b.add(rng.choice(lex["instrument"]), "obl")
        b.attach(noun, verb)
    else:
        noun = b.add(rng.choice(lex["noun"]), "nmod")
        b.attach(noun, last_noun)
    b.attach(prep, noun)
    b.attach(det, noun)
    return noun


def sentence(rng, lex, max_adj, max_pp):
    b = Builder()
    subj = noun_phrase(b, rng, lex, max_adj)
    b.labels[subj - 1] = "nsubj"
    transitive = rng.random() < 0.7
    verb = b.add(rng.choice(lex["tverb"] if transitive else lex["iverb"]), "root")
    b.attach(subj, verb)
    b.attach(verb, 0)
    last_noun = subj
    if transitive:
        obj = noun_phrase(b, rng, lex, max_adj)
        b.labels[obj - 1] = "obj"
        b.attach(obj, verb)
        last_noun = obj
    for _ in range(rng.randint(0, max_pp)):
        last_noun = prep_phrase(b, rng, lex, verb, last_noun)
    if rng.random() < 0.3:
        adv = b.add(rng.choice(lex["adv"]), "advmod")
        b.attach(adv, verb)
    return b


def conll(b):
    lines = []
    for i, (w, h, l) in enumerate(zip(b.words, b.heads, b.labels), start=1):
        lines.append("\t".join([str(i), w, w, "_", "_", "_", str(h), l, "_", "_"]))
    return "\n".join(lines) + "\n\n"


def write(path, text):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "toy"))
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    rng = random.Random(args.seed)
    copy = [sentence(rng, COPY_LEXICON, 1, 1) for _ in range(200)]
    write(os.path.join(args.out, "copy.src"), "".join(" ".join(b.words) + "\n" for b in copy))
    write(os.path.join(args.out, "copy.tgt"), "".join(" ".join(b.words).upper() + "\n" for b in copy))
    write(os.path.join(args.out, "copy.src.conll"), "".join(conll(b) for b in copy))

    bank = [sentence(rng, TREEBANK_LEXICON, 2, 2) for _ in range(500)]
    write(os.path.join(args.out, "treebank.conll"), "".join(conll(b) for b in bank))
    write(os.path.join(args.out, "treebank_small.conll"), "".join(conll(b) for b in bank[:50]))
    write(os.path.join(args.out, "treebank_train.conll"), "".join(conll(b) for b in bank[:400]))
    write(os.path.join(args.out, "treebank_dev.conll"), "".join(conll(b) for b in bank[400:]))


if __name__ == "__main__":
    main()
