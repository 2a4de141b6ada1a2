#!/usr/bin/env python3
"""Regenerates the lexical resources shipped under data/.

Inputs are third-party datasets available as Python packages:
  wordfreq       word frequencies            -> data/frequency.tsv
  lemminflect    inflection/lemma lexicon    -> data/lemmas.tsv
  WordNet 3.0    antonym pointers            -> data/antonyms.tsv
  geonamescache  GeoNames world cities       -> data/gazetteer.csv, data/gazetteer_stoplist.txt

Usage: build_resources.py --wordnet-dir PATH/TO/wordnet-3.0 [--out data]
"""
import argparse
import csv
import os
import re

import geonamescache
import lemminflect
import wordfreq

WORD_RE = re.compile(r"^[a-z]+(?:'[a-z]+)?$")
N_FREQ = 40000
N_CITIES = 12900


def build_frequency(out):
    words = [w for w in wordfreq.top_n_list("en", 80000) if WORD_RE.match(w)][:N_FREQ]
    with open(os.path.join(out, "frequency.tsv"), "w", encoding="utf-8") as f:
        f.write("# word<TAB>count; counts are wordfreq frequencies scaled by 1e9\n")
        for w in words:
            count = max(1, round(wordfreq.word_frequency(w, "en") * 1e9))
            f.write(f"{w}\t{count}\n")
    return words


def build_lemmas(out, words):
    priority = ["AUX", "VERB", "NOUN", "ADJ", "ADV"]
    raw = {}
    for w in words:
        if "'" in w:
            continue
        lemmas = lemminflect.getAllLemmas(w)
        for pos in priority:
            if pos in lemmas and lemmas[pos]:
                lemma = lemmas[pos][0]
                if lemma != w and WORD_RE.match(lemma) and lemma != "not":
                    raw[w] = lemma
                break
    # Resolve chains so that lemma(lemma(x)) == lemma(x).
    table = {}
    for w in raw:
        seen = {w}
        cur = raw[w]
        while cur in raw and cur not in seen:
            seen.add(cur)
            cur = raw[cur]
        if cur in seen:
            continue
        table[w] = cur
    with open(os.path.join(out, "lemmas.tsv"), "w", encoding="utf-8") as f:
        f.write("# inflected<TAB>lemma\n")
        for w in sorted(table):
            f.write(f"{w}\t{table[w]}\n")
    return table


def read_wordnet(path, pos_file):
    synsets = {}
    with open(os.path.join(path, "data." + pos_file), encoding="utf-8") as f:
        for line in f:
            if line.startswith("  "):
                continue
            parts = line.split(" | ")[0].split()
            offset = parts[0]
            w_cnt = int(parts[3], 16)
            words = [parts[4 + 2 * i].lower() for i in range(w_cnt)]
            words = [re.sub(r"\(.*\)$", "", w) for w in words]
            i = 4 + 2 * w_cnt
            p_cnt = int(parts[i])
            ptrs = []
            for j in range(p_cnt):
                sym, off, pos, st = parts[i + 1 + 4 * j : i + 5 + 4 * j]
                ptrs.append((sym, off, pos, int(st[:2], 16), int(st[2:], 16)))
            synsets[offset] = (words, ptrs)
    index = {}
    with open(os.path.join(path, "index." + pos_file), encoding="utf-8") as f:
        for line in f:
            if line.startswith("  "):
                continue
            parts = line.split()
            lemma = parts[0]
            p_cnt = int(parts[3])
            synset_cnt = int(parts[2])
            offsets = parts[-synset_cnt:]
            index[lemma] = offsets
    return synsets, index


def build_antonyms(out, wordnet_dir, vocab, lemma_table):
    result = {}
    for pos_file in ("verb", "adj", "adv"):
        synsets, index = read_wordnet(wordnet_dir, pos_file)
        for lemma, offsets in index.items():
            if lemma in result or "_" in lemma or lemma not in vocab:
                continue
            for off in offsets:
                words, ptrs = synsets[off]
                if lemma not in words:
                    continue
                src = words.index(lemma) + 1
                found = None
                for sym, toff, _pos, s, t in ptrs:
                    if sym == "!" and s == src and toff in synsets:
                        target_words = synsets[toff][0]
                        if 0 < t <= len(target_words):
                            found = target_words[t - 1]
                            break
                if found and "_" not in found and found != lemma:
                    result[lemma] = found
                    break
    with open(os.path.join(out, "antonyms.tsv"), "w", encoding="utf-8") as f:
        f.write("# word<TAB>antonym (first-sense direct antonyms, WordNet 3.0)\n")
        for w in sorted(result):
            f.write(f"{w}\t{result[w]}\n")


def build_gazetteer(out):
    gc = geonamescache.GeonamesCache()
    countries = {c["iso"]: c["name"] for c in gc.get_countries().values()}
    cities = sorted(gc.get_cities().values(), key=lambda c: -c["population"])[:N_CITIES]
    stop = set()
    with open(os.path.join(out, "gazetteer.csv"), "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["city", "country", "population"])
        for c in cities:
            name = c["name"]
            w.writerow([name, countries.get(c["countrycode"], c["countrycode"]), c["population"]])
            low = name.lower()
            if " " not in low and lemminflect.getAllLemmas(low):
                stop.add(low)
    with open(os.path.join(out, "gazetteer_stoplist.txt"), "w", encoding="utf-8") as f:
        f.write("# place names that are also common English words; matched only after a locative cue\n")
        for s in sorted(stop):
            f.write(s + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wordnet-dir", required=True)
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    words = build_frequency(args.out)
    lemma_table = build_lemmas(args.out, words)
    build_antonyms(args.out, args.wordnet_dir, set(words), lemma_table)
    build_gazetteer(args.out)


if __name__ == "__main__":
    main()
