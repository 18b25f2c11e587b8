"""Regenerate the JSON fixtures shipped in src/kgring/fixtures."""

import random
from pathlib import Path

from kgring.examples import random_exact_free, six_module, standard_module, witness_module
from kgring.io import dump, extension_to_dict, module_to_dict
from kgring.modules import Extension, KGModule, external_tensor, free_cover, free_module
from kgring.modules import _kernel_module
from kgring.splitting import random_extension

OUT = Path(__file__).resolve().parents[1] / "src" / "kgring" / "fixtures"


def main():
    OUT.mkdir(exist_ok=True)
    std = module_to_dict(standard_module(2).module)
    dump(std, OUT / "standard_p2.json")
    bad = module_to_dict(standard_module(2).module)
    bad["maps"]["p=2:alpha10"]["0"][0][0] = "3"
    dump(bad, OUT / "standard_p2_corrupted.json")
    dump(module_to_dict(KGModule((2,), {})), OUT / "empty.json")
    dump(module_to_dict(witness_module(2)), OUT / "witness_p2.json")
    dump(module_to_dict(six_module().module), OUT / "six_z6.json")
    dump(module_to_dict(free_module((2, 3), (1, 0), 6)), OUT / "free_6.json")

    rng = random.Random(2024)
    Q = random_exact_free(rng)
    sub = free_module((2, 3), (0, 1), 6)
    dump(extension_to_dict(random_extension(sub, Q, seed=7)), OUT / "extension_6.json")
    Q2 = standard_module(2).module
    dump(extension_to_dict(random_extension(free_module((2,), (2,), 2), Q2, seed=3)), OUT / "extension_p2.json")

    M = external_tensor(witness_module(2), witness_module(3))
    cov = free_cover(M, [((1, 1), 0)])
    K, inc = _kernel_module(cov)
    dump(extension_to_dict(Extension(inc, cov.projection)), OUT / "nonexact_6.json")


if __name__ == "__main__":
    main()
