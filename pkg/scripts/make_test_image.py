#!/usr/bin/env python3
"""Write the deterministic synthetic test scene as a PGM (or PNG)."""
import argparse

from picodec import save_image, synthetic_scene


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--lo", type=float, default=0.1)
    parser.add_argument("--hi", type=float, default=0.9)
    parser.add_argument("--output", default="scene.pgm")
    args = parser.parse_args()
    save_image(synthetic_scene(args.size, args.lo, args.hi), args.output)
    print(args.output)


if __name__ == "__main__":
    main()
