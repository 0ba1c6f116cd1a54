"""Build script for the optional compiled interpreter core.

The hot kernel lives in src/mutafuzz/minilang/_vm.py and is written in
Cython "pure Python" style: plain Python that also compiles with C-typed
locals. At build time the file is copied to _vm_compiled.pyx and compiled
into an extension module; at import time mutafuzz prefers the compiled
module and falls back to the interpreted one (see minilang/engine.py).

If Cython is unavailable the package installs without the extension and
everything runs on the pure-Python engine.
"""

import os
import shutil

from setuptools import setup

os.chdir(os.path.dirname(os.path.abspath(__file__)) or ".")

KERNELS = [
    ("mutafuzz.minilang._vm_compiled", os.path.join("src", "mutafuzz", "minilang"), "_vm"),
    ("mutafuzz._rng_compiled", os.path.join("src", "mutafuzz"), "_rng"),
]

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = []
    for module, directory, stem in KERNELS:
        pyx = os.path.join(directory, stem + "_compiled.pyx")
        shutil.copyfile(os.path.join(directory, stem + ".py"), pyx)
        extensions.append(Extension(module, [pyx]))
    ext_modules = cythonize(
        extensions, compiler_directives={"language_level": "3"}
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
