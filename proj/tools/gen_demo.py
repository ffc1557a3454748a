#!/usr/bin/env python3
"""Builds the bundled demo scene corpus.

Writes data/demo/graphs.jsonl: 50 synthetic annotated scenes across five
scene kinds. Layouts are templated with seeded jitter, so the output is
stable byte for byte. The mix is arranged to cover every question family
the catalog knows: global weather/location triggers, spatial pairs on both
axes, ordered-attribute pairs for comparisons, shared and distinct values
for sameness questions, and category-unique objects whose categories have
other members elsewhere in the corpus. It also bakes in the annotation
noise the normalizer has to survive: synonyms, typos, stopwords, unknown
tokens, duplicate exclusive attributes and redundant raw spatial edges.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "demo" / "graphs.jsonl"


class Scene:
    def __init__(self, image_id, width, height):
        self.image_id = image_id
        self.width = width
        self.height = height
        self.objects = {}
        self.n = 0

    def add(self, name, x, y, w, h, attrs=(), rels=()):
        oid = "o%d" % self.n
        self.n += 1
        assert x >= 0 and y >= 0 and x + w <= self.width and y + h <= self.height, \
            (self.image_id, name, x, y, w, h)
        self.objects[oid] = {
            "name": name,
            "x": x, "y": y, "w": w, "h": h,
            "attributes": list(attrs),
            "relations": [{"name": p, "object": t} for p, t in rels],
        }
        return oid

    def rel(self, subj, pred, obj):
        self.objects[subj]["relations"].append({"name": pred, "object": obj})

    def record(self):
        return {
            "imageId": self.image_id,
            "width": self.width,
            "height": self.height,
            "objects": self.objects,
        }


def kitchen(rng, i):
    s = Scene("demo_kitchen_%02d" % i, 640, 480)
    table_name = "tabel" if i % 4 == 0 else "table"
    table = s.add(table_name, 70, 280, 500, 170,
                  [rng.choice(["wooden", "wooden", "white"]), "large", "brown" if i % 3 else "old"])
    appliance = rng.choice(["stove", "fridge", "refrigerator", "oven"])
    s.add(appliance, 575, 40, 60, 240, ["white" if i % 2 else "metal", "tall"])

    items = [
        ("apple", rng.choice(["red", "red", "green"]), 36),
        ("bannana" if i % 5 == 0 else "banana", "yellow", 30),
        ("pear", "green", 34),
        ("tomato", "red", 30),
        ("cup", rng.choice(["white", "blue"]), 40),
        ("bottle", rng.choice(["green", "blue"]), 56),
        ("bowl", "brown", 30),
        ("cheese", "yellow", 26),
        ("bread", "brown", 30),
        ("egg", "white", 22),
    ]
    rng.shuffle(items)
    x = 100
    for name, color, h in items[: 3 + i % 3]:
        s.add(name, x, 282 - h, 50, h, [color, "small"], [("on", table)])
        x += rng.randrange(85, 120)

    if i % 2 == 0:
        chair = s.add("chair", 5, 300, 80, 150, ["wooden", "small"], [("near", table)])
        if i % 4 == 0:
            s.rel(chair, "to the left of", table)  # redundant, re-derived anyway
    if i % 3 == 0:
        person = "woman" if i % 2 else "man"
        p = s.add(person, 380, 60, 100, 210, ["tall", "young" if i % 2 else "old"])
        shirt = s.add("shirt", 395, 120, 70, 80, [rng.choice(["blue", "green", "red"])])
        s.rel(p, "wearing", shirt)
        first_item = "o2"
        s.rel(p, "holding", first_item)
    if i == 3:
        s.add("gizmo", 10, 10, 40, 40)  # unknown name, dropped by the normalizer
    if i == 7:
        s.objects["o2"]["attributes"].append("sparkly")  # unknown attribute
    return s


def street(rng, i):
    s = Scene("demo_street_%02d" % i, 800, 600)
    car = s.add("car", 60, 380, 230, 140,
                [rng.choice(["red", "blue", "black", "white"]), "new" if i % 2 else "old"])
    big = rng.choice(["bus", "truck"])
    big_oid = s.add(big, 430, 330, 300, 190,
                    ["yellow" if big == "bus" else "white", "large", "old" if i % 2 else "new"])
    person = s.add(rng.choice(["man", "woman"]), 310, 250, 80, 230, ["tall", "young"])
    hat = s.add("hat", 322, 238, 55, 40, [rng.choice(["black", "brown", "red"]), "small"])
    s.rel(person, "wearing", hat)
    s.rel(person, "in front of", big_oid)
    dog = s.add("puppy" if i % 3 == 0 else "dog", 180, 490, 95, 75,
                [rng.choice(["brown", "black", "white"]), "small", "young"])
    s.rel(dog, "next to" if i % 2 else "near", person)
    s.add("tree", 5, 60, 120, 340, ["green", "tall"])
    if i % 2 == 0:
        s.add("sun", 640, 30, 90, 80, ["yellow", "round"])
    else:
        s.add("cloud", 620, 40, 110, 60, ["grey" if i % 3 else "white", "large"])
    if i % 3 == 1:
        bike = s.add("bike", 560, 440, 140, 90, [rng.choice(["red", "green"]), "new"])
        s.rel(person, "near", bike)
    if i % 4 == 2:
        s.add("aeroplane", 80, 20, 150, 50, ["white", "large"])
    if i == 5:
        s.rel(dog, "admiring", person)  # unknown predicate, dropped
    return s


def bedroom(rng, i):
    s = Scene("demo_bedroom_%02d" % i, 640, 480)
    bed = s.add("bed", 40, 260, 420, 190, [rng.choice(["white", "blue"]), "large"])
    s.add("pillow", 60, 268, 110, 58, ["white" if i % 2 else "pink", "small", "square"],
          [("on top of", bed)])
    cat = s.add("kitten" if i % 3 == 0 else "cat", 260, 250, 100, 78,
                [rng.choice(["grey", "white", "black"]), "small", "young"])
    s.rel(cat, "on", bed)
    desk = s.add("desk", 480, 300, 150, 150, ["wooden", "brown"])
    s.add("lamp", 495, 215, 60, 85, ["yellow" if i % 2 else "white", "small"], [("on", desk)])
    s.add("book", 565, 265, 60, 34, [rng.choice(["red", "blue", "green"]), "small"], [("on", desk)])
    if i % 2 == 0:
        s.add("clock", 280, 60, 70, 70, ["white", "round", "old" if i % 4 else "new"])
    if i % 3 == 0:
        s.add("mirror", 80, 60, 100, 160, ["square", "large"])
    else:
        s.add("window", 420, 40, 160, 170, ["square"])
    if i == 2:
        s.add("a table", 10, 10, 60, 40, ["wooden"])  # stopword surface form
    if i == 4:
        s.objects["o1"]["attributes"].extend(["blue"])  # second color, clash dropped
    return s


def beach(rng, i):
    s = Scene("demo_beach_%02d" % i, 800, 600)
    sand = s.add("sand", 0, 420, 800, 180, ["yellow" if i % 2 else "brown"])
    if i % 3 == 2:
        s.add("cloud", 610, 40, 120, 60, ["white", "large"])
    else:
        s.add("sun", 650, 40, 100, 90, ["yellow", "round"])
    umb = s.add("umbrella", 110, 150, 230, 170,
                [rng.choice(["red", "blue", "pink"]), "large", "round"])
    p1 = s.add(rng.choice(["man", "woman"]), 190, 290, 85, 225, ["tall", "old" if i % 4 == 0 else "young"])
    s.rel(p1, "under", umb)
    hat = s.add("hat", 205, 280, 58, 36, ["white" if i % 2 else "yellow", "small"])
    s.rel(p1, "wearing", hat)
    kid = s.add("boy" if i % 2 else "girl", 520, 330, 70, 165, ["short", "young", "small"])
    basket = s.add("basket", 540, 430, 72, 60, ["brown", "small"], [("on", sand)])
    s.rel(kid, "holding", basket)
    s.add("bird", 600, 140, 70, 48, ["white" if i % 3 else "black", "small"])
    if i % 2 == 0:
        dog = s.add("dog", 420, 470, 105, 85, [rng.choice(["brown", "white"]), "small", "young"])
        s.rel(dog, "beside", kid)
    if i == 6:
        s.add("thingamajig", 740, 540, 50, 50)  # unknown name
    return s


def park(rng, i):
    s = Scene("demo_park_%02d" % i, 1024, 768)
    grass = s.add("grass", 0, 500, 1024, 268, ["green"])
    s.add("tree", 60, 80, 180, 460, ["green", "tall", "large"])
    s.add("tree", 810, 150, 150, 390, ["green", "short"])
    animal = rng.choice(["horse", "cow", "sheep"])
    a = s.add(animal, 380, 360, 270, 230,
              [rng.choice(["brown", "white", "black"]), "large", "old" if i % 3 == 0 else "young"])
    s.rel(a, "eating", grass)
    s.rel(a, "on", grass)
    small = s.add("dog" if i % 2 else "cat", 710, 570, 110, 88,
                  [rng.choice(["black", "brown", "grey"]), "small"])
    s.rel(small, "near", a)
    person = s.add("man" if i % 2 else "woman", 255, 290, 90, 250, ["tall", "young" if i % 2 else "old"])
    if animal == "horse" and i % 3 == 1:
        s.rel(person, "riding", a)
    else:
        s.rel(person, "looking at" if i % 2 else "watching", a)
    s.add("bird", 120, 110, 58, 40, ["small", rng.choice(["black", "white", "blue"])])
    if i % 2 == 0:
        s.add("chair", 880, 610, 120, 130, ["wooden", "old"])
    if i % 3 == 0:
        s.add("sun", 920, 30, 80, 75, ["yellow", "round"])
    elif i % 3 == 1:
        s.add("cloud", 890, 40, 110, 60, ["white"])
    return s


def main():
    rng = random.Random(991)
    scenes = []
    for i in range(12):
        scenes.append(kitchen(rng, i))
    for i in range(10):
        scenes.append(street(rng, i))
    for i in range(9):
        scenes.append(bedroom(rng, i))
    for i in range(10):
        scenes.append(beach(rng, i))
    for i in range(9):
        scenes.append(park(rng, i))
    assert len(scenes) == 50
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w") as f:
        for s in scenes:
            f.write(json.dumps(s.record(), sort_keys=True) + "\n")
    print("wrote %d graphs to %s" % (len(scenes), OUT))


if __name__ == "__main__":
    main()
