#!/usr/bin/env python3
"""Convert torchvision ImageNet weights into a numta backbone archive.

    convert_torchvision.py resnet50 resnet50.ntc
    convert_torchvision.py efficientnetb0 effnet.ntc --state-dict efficientnet_b0.pth

Without --state-dict the torchvision pretrained weights are downloaded.
--random writes a randomly initialised model instead (useful for testing).
The classifier is written too but numta never loads it: the ten-class head
is always freshly initialised.
"""

import argparse
import json
import re
import struct
import sys

import numpy as np
import torch
import torchvision

MAGIC = b"NUMTANTC"
FORMAT_VERSION = 1

# torchvision EfficientNet-B0 stage sizes; numta numbers its MBConv blocks 0..15
EFFNET_B0_STAGES = [1, 2, 2, 3, 3, 4, 1]


def build(kind, random):
    if kind == "resnet50":
        return torchvision.models.resnet50(weights=None if random else "DEFAULT")
    if kind == "inceptionv3":
        return torchvision.models.inception_v3(weights=None if random else "DEFAULT", aux_logits=True,
                                               init_weights=random)
    if kind == "efficientnetb0":
        return torchvision.models.efficientnet_b0(weights=None if random else "DEFAULT")
    raise SystemExit(f"unsupported kind {kind}")


def effnet_name(name):
    """torchvision efficientnet_b0 parameter name -> numta name, or None to drop."""
    norm = {"0": "conv", "1": "bn"}
    if name.startswith("classifier.1."):
        return "fc." + name.split(".")[-1]
    m = re.fullmatch(r"features\.0\.([01])\.(\w+)", name)
    if m:
        return f"stem.{norm[m[1]]}.{m[2]}"
    m = re.fullmatch(r"features\.8\.([01])\.(\w+)", name)
    if m:
        return f"head.{norm[m[1]]}.{m[2]}"
    m = re.fullmatch(r"features\.(\d)\.(\d+)\.block\.(\d)\.(.+)", name)
    if not m:
        return None
    stage, index, part, rest = int(m[1]), int(m[2]), int(m[3]), m[4]
    block = sum(EFFNET_B0_STAGES[: stage - 1]) + index
    roles = ["depthwise", "se", "project"] if stage == 1 else ["expand", "depthwise", "se", "project"]
    role = roles[part]
    if role == "se":
        sub, field = rest.split(".")
        return f"blocks.{block}.se.{ {'fc1': 'reduce', 'fc2': 'expand'}[sub] }.{field}"
    sub, field = rest.split(".")
    return f"blocks.{block}.{role}.{norm[sub]}.{field}"


def rename(kind, name):
    if name.endswith("num_batches_tracked") or name.startswith("AuxLogits."):
        return None
    if kind == "efficientnetb0":
        return effnet_name(name)
    return name


def convert(kind, state):
    tensors = []
    for name, value in state.items():
        target = rename(kind, name)
        if target is not None:
            tensors.append((target, value.detach().cpu().numpy().astype("<f4")))
    return tensors


def write_archive(path, kind, tensors):
    entries, offset = [], 0
    for name, array in tensors:
        entries.append({"name": name, "dtype": "f32", "shape": list(array.shape), "offset": offset})
        offset += array.nbytes
    header = json.dumps({"format_version": FORMAT_VERSION, "kind": kind, "source": "torchvision",
                         "tensors": entries}).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQ", FORMAT_VERSION, len(header)))
        f.write(header)
        for _, array in tensors:
            f.write(np.ascontiguousarray(array).tobytes())


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("kind", choices=["resnet50", "inceptionv3", "efficientnetb0"])
    p.add_argument("out")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--state-dict", help="local torchvision state_dict (.pth)")
    src.add_argument("--random", action="store_true", help="random initialisation, no download")
    args = p.parse_args(argv)

    model = build(args.kind, args.random or args.state_dict is not None)
    if args.state_dict:
        model.load_state_dict(torch.load(args.state_dict, map_location="cpu"))
    tensors = convert(args.kind, model.state_dict())
    write_archive(args.out, args.kind, tensors)
    print(f"wrote {len(tensors)} tensors to {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
