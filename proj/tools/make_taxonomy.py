#!/usr/bin/env python3
"""Regenerate data/taxonomy.csv and data/cores.json from the ImageNet class list.

ImageNet classes 0-397 are the animal subtree. Two extinct taxa (triceratops,
trilobite) are dropped, leaving 396 living-animal categories. Species ids are a
slug of the class name except where several classes are breeds of one species.
"""
import json
import pathlib
import re

from torchvision.models import ResNet50_Weights

EXCLUDED = {51, 69}  # triceratops, trilobite
DOGS = range(151, 269)
INSECTS = range(300, 327)
SHARED_SPECIES = {
    **{i: "canis_familiaris" for i in DOGS},
    **{i: "felis_catus" for i in range(281, 286)},
    7: "gallus_gallus", 8: "gallus_gallus",
    341: "sus_scrofa", 342: "sus_scrofa",
}

AQUATIC = [*range(0, 7), 33, 34, 65, 107, 108, 109, 112, *range(115, 126),
           147, 148, 149, 150, 327, 328, 329, 360, *range(389, 398)]
CANINE = list(DOGS)
BIRD = [*range(7, 25), *range(80, 101), *range(127, 147)]
MEGAFAUNA = [48, 49, 50, 101, 269, 276, *range(286, 298), *range(339, 356),
             365, 366, 367, 385, 386, 388]


def slug(name):
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def main():
    names = ResNet50_Weights.IMAGENET1K_V1.meta["categories"]
    ids = [i for i in range(398) if i not in EXCLUDED]
    root = pathlib.Path(__file__).resolve().parent.parent / "data"
    with open(root / "taxonomy.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("id,name,species_id,is_dog,is_insect\n")
        for i in ids:
            species = SHARED_SPECIES.get(i, slug(names[i]))
            f.write(f"{i},{names[i]},{species},{int(i in DOGS)},{int(i in INSECTS)}\n")
    taken = set(AQUATIC) | set(CANINE) | set(BIRD) | set(MEGAFAUNA)
    wildcard = [i for i in ids if i not in taken]
    cores = {
        "_version": 1,
        "aquatic": AQUATIC,
        "canine": CANINE,
        "bird": BIRD,
        "megafauna": MEGAFAUNA,
        "wildcard": wildcard,
    }
    with open(root / "cores.json", "w", encoding="utf-8") as f:
        json.dump(cores, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
