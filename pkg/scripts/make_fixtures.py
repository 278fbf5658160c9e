#!/usr/bin/env python3
"""Regenerate the bundled fixture files under src/senscommon/data/.

Everything here is deterministic; re-running produces byte-identical files.
The embedding fixture must cover the full corpus/parse vocabulary, otherwise
the OOV-drop policy would empty the demo datasets.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parents[1] / "src" / "senscommon" / "data"

NOUNS = """
air airport area bank beach bees bells bell birds bird blossoms boats brakes bread
bus cafe cars car cats cat center children child city clocks clock coffee construction
crowd dog dogs door doors eggs engine engines evening fire fish forest garbage garden
gasoline glass grocery hall harbor home kitchen lavender leaf leaves library market
metro morning music nature night noise ovation park people rain roses sand sea sirens
siren smoke station store street thunder traffic tram train water waves wave wind
""".split()

DEP_LABELS = """
acl advcl advmod amod aux case cc compound conj cop det mark nmod nsubj obj obl punct
root xcomp
""".split()

MISC = "up down scene sound smell path sentence".split()

CORPUS_LINES = [
    "We sat at the beach while we listened to the sound of waves crashing.",
    "The sound of birds chirping, loud and sweet, filled the park in the morning.",
    "I heard the sound of rain, soft and cold, at night.",
    "We heard the sound of honking cars, and the noise filled the air.",
    "There was the sound of bells ringing.",
    "The sound of thunder, distant and strong, woke the children.",
    "We loved the sound of singing children.",
    "A dog sat by the door. We heard birds chirping in the garden.",
    "The crowd gave a standing ovation at the hall.",
    "Squealing brakes and honking cars filled the street with noise.",
    "The surrounding nature was quiet.",
    "Dogs barking at night could wake the city.",
    "The kitchen was full of the smell of rotten eggs.",
    "We walked in the garden and noticed the smell of cherry blossoms.",
    "The smell of fresh bread, warm and sweet, filled the market.",
    "I love the smell of coffee, warm and strong, in the morning.",
    "We noticed the smell of rain, fresh and cold.",
    "The smell of smoke, old and strong, drifted from the fire.",
    "There was the smell of garbage, strong and warm, at the metro station.",
    "The garden was full of the smell of roses.",
    "We noticed the smell of lavender, and the smell of the sea.",
    "Children laughing in the park, birds chirping in the garden.",
    "We heard the sound of hammering, loud and strong, near the construction area.",
    "Wind howling over the sea kept the boats in the harbor.",
    "The sound of sirens wailing, distant in the city, woke us.",
    "We heard leaves rustling and water dripping in the forest.",
    "The clocks ticking in the library made a soft noise.",
    "The sound of engines roaring, loud and strong, came from the airport.",
    "A cat meowing sat by the warm door.",
    "The sound of laughing, the sound of shouting, the sound of music.",
    "No matching text here, just a quiet evening at home.",
    "The smell of gasoline, strong and new, filled the bus station.",
    "We noticed the smell of fish, salty and strong, at the market.",
    "The sound of the wind, soft and cold, came from the forest.",
    "We heard the sound of drumming, loud in the hall.",
    "Buzzing bees in the garden made a soft humming noise.",
    "The whistling wind and the creaking door made the night loud.",
    "Clapping crowds filled the hall with the sound of clapping.",
    "Splashing water in the harbor, birds chirping in the air.",
    "The sound of banging doors, loud and cold, echoed in the office.",
    "We came home and enjoyed the smell of fresh bread.",
    "The sound of rain, soft on the street, made the evening warm.",
    "The children could hear birds chirping near the library.",
    "We sat in the cafe with the sound of music.",
    "Honking traffic filled the city center while we walked to the tram.",
]

SCENES = [
    "beach", "park", "airport", "construction", "street", "forest",
    "bus", "cafe", "city center", "forest path", "grocery store", "home",
    "library", "metro station", "office", "residential area", "train",
    "tram", "urban park", "station", "market",
]

# (plural noun, noun lemma, gerund, gerund lemma)
PAIRS = [
    ("waves", "wave", "crashing", "crash"),
    ("birds", "bird", "chirping", "chirp"),
    ("cars", "car", "honking", "honk"),
    ("dogs", "dog", "barking", "bark"),
    ("bells", "bell", "ringing", "ring"),
    ("children", "child", "laughing", "laugh"),
    ("sirens", "siren", "wailing", "wail"),
    ("engines", "engine", "roaring", "roar"),
    ("leaves", "leaf", "rustling", "rustle"),
    ("doors", "door", "banging", "bang"),
]

PARSE_SCENES = ["beach", "park", "street", "forest", "airport",
                "station", "library", "office", "market", "construction"]


def template_a(sn, sl, sg, gl, scene):
    return [
        (1, "we", "we", "PRON", "PRP", 2, "nsubj"),
        (2, "heard", "hear", "VERB", "VBD", 0, "root"),
        (3, sn, sl, "NOUN", "NNS", 2, "obj"),
        (4, sg, gl, "VERB", "VBG", 3, "acl"),
        (5, "at", "at", "ADP", "IN", 7, "case"),
        (6, "the", "the", "DET", "DT", 7, "det"),
        (7, scene, scene, "NOUN", "NN", 2, "obl"),
        (8, ".", ".", "PUNCT", ".", 2, "punct"),
    ]


def template_b(sn, sl, sg, gl, scene):
    return [
        (1, "the", "the", "DET", "DT", 2, "det"),
        (2, scene, scene, "NOUN", "NN", 4, "nsubj"),
        (3, "was", "be", "AUX", "VBD", 4, "cop"),
        (4, "full", "full", "ADJ", "JJ", 0, "root"),
        (5, "of", "of", "ADP", "IN", 7, "case"),
        (6, "the", "the", "DET", "DT", 7, "det"),
        (7, "sound", "sound", "NOUN", "NN", 4, "obl"),
        (8, "of", "of", "ADP", "IN", 9, "case"),
        (9, sn, sl, "NOUN", "NNS", 7, "nmod"),
        (10, sg, gl, "VERB", "VBG", 9, "acl"),
        (11, ".", ".", "PUNCT", ".", 4, "punct"),
    ]


def template_c(sn, sl, sg, gl, scene):
    return [
        (1, sn, sl, "NOUN", "NNS", 3, "nsubj"),
        (2, sg, gl, "VERB", "VBG", 1, "acl"),
        (3, "echoed", "echo", "VERB", "VBD", 0, "root"),
        (4, "across", "across", "ADP", "IN", 6, "case"),
        (5, "the", "the", "DET", "DT", 6, "det"),
        (6, scene, scene, "NOUN", "NN", 3, "obl"),
        (7, ".", ".", "PUNCT", ".", 3, "punct"),
    ]


def template_d(sn, sl, sg, gl, scene):
    return [
        (1, "at", "at", "ADP", "IN", 3, "case"),
        (2, "the", "the", "DET", "DT", 3, "det"),
        (3, scene, scene, "NOUN", "NN", 5, "obl"),
        (4, "we", "we", "PRON", "PRP", 5, "nsubj"),
        (5, "listened", "listen", "VERB", "VBD", 0, "root"),
        (6, "to", "to", "ADP", "IN", 7, "case"),
        (7, sn, sl, "NOUN", "NNS", 5, "obl"),
        (8, sg, gl, "VERB", "VBG", 7, "acl"),
        (9, ".", ".", "PUNCT", ".", 5, "punct"),
    ]


def template_e(sn, sl, sg, gl, scene):
    return [
        (1, "we", "we", "PRON", "PRP", 2, "nsubj"),
        (2, "heard", "hear", "VERB", "VBD", 0, "root"),
        (3, "the", "the", "DET", "DT", 5, "det"),
        (4, sg, gl, "VERB", "VBG", 5, "amod"),
        (5, sn, sl, "NOUN", "NNS", 2, "obj"),
        (6, "near", "near", "ADP", "IN", 8, "case"),
        (7, "the", "the", "DET", "DT", 8, "det"),
        (8, scene, scene, "NOUN", "NN", 2, "obl"),
        (9, ".", ".", "PUNCT", ".", 2, "punct"),
    ]


TEMPLATES = [template_a, template_b, template_c, template_d, template_e]


def make_conllu() -> str:
    lines = []
    for i in range(50):
        tpl = TEMPLATES[i % 5]
        sn, sl, sg, gl = PAIRS[i % 10]
        scene = PARSE_SCENES[(i // 5) % 10]
        rows = tpl(sn, sl, sg, gl, scene)
        text = " ".join(r[1] for r in rows[:-1]) + " ."
        lines.append(f"# sent_id = s{i + 1:03d}")
        lines.append(f"# text = {text}")
        for idx, form, lemma, upos, xpos, head, rel in rows:
            lines.append(f"{idx}\t{form}\t{lemma}\t{upos}\t{xpos}\t_\t{head}\t{rel}\t_\t_")
        lines.append("")
    return "\n".join(lines) + "\n"


def make_vectors(vocab: list[str], dim: int = 8) -> str:
    rng = np.random.default_rng(20160519)
    out = [f"{len(vocab)} {dim}"]
    for word in vocab:
        vec = rng.normal(0.0, 0.5, size=dim)
        out.append(word + " " + " ".join(f"{x:.4f}" for x in vec))
    return "\n".join(out) + "\n"


def main() -> int:
    DATA.mkdir(parents=True, exist_ok=True)

    # The embedding vocabulary is exactly what the fixtures can produce:
    # corpus tokens, parse forms/lemmas, dependency labels, path markers.
    corpus_words = set()
    for line in CORPUS_LINES:
        for tok in line.lower().split():
            core = tok.strip(".,;:!?\"'()")
            if core:
                corpus_words.add(core)

    conllu = make_conllu()
    parse_words = set()
    for ln in conllu.splitlines():
        if ln and not ln.startswith("#"):
            cols = ln.split("\t")
            if len(cols) == 10 and cols[1] != ".":
                parse_words.update({cols[1], cols[2]})

    vocab = sorted(corpus_words | parse_words | set(DEP_LABELS) | set(MISC))
    assert len(vocab) <= 200, f"fixture vocabulary too large: {len(vocab)}"

    (DATA / "nouns.txt").write_text("\n".join(sorted(set(NOUNS))) + "\n", encoding="utf-8")
    (DATA / "scenes.txt").write_text("\n".join(SCENES) + "\n", encoding="utf-8")
    (DATA / "corpus_fixture.txt").write_text("\n".join(CORPUS_LINES) + "\n", encoding="utf-8")
    (DATA / "parses_fixture.conllu").write_text(conllu, encoding="utf-8")
    (DATA / "fixture_vectors.txt").write_text(make_vectors(vocab), encoding="utf-8")
    print(f"wrote fixtures: vocab={len(vocab)} corpus_lines={len(CORPUS_LINES)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
