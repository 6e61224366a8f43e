"""Flatten the English chatterbot-corpus YAML files into tab-separated dialogs.

usage: python3 chatterbot_to_tdc.py <chatterbot_corpus/data/english> <out.tdc.txt>
"""
import glob
import os
import re
import sys

import yaml


def main(src, dst):
    lines = []
    for path in sorted(glob.glob(os.path.join(src, "*.yml"))):
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f)
        for conv in doc.get("conversations", []):
            turns = [re.sub(r"\s+", " ", str(t)).strip() for t in conv]
            turns = [t for t in turns if t]
            if len(turns) >= 2:
                lines.append("\t".join(turns))
    with open(dst, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    print(f"{len(lines)} dialogs", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
