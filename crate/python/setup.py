"""Builds the quasi2d_py extension module by delegating to cargo.

Install with `pip install -e . --no-build-isolation` from this directory.
The only build requirement beyond setuptools is a Rust toolchain.
"""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

REPO_ROOT = Path(__file__).resolve().parent.parent


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        subprocess.check_call(
            ["cargo", "build", "--release", "-p", "quasi2d-py"], cwd=REPO_ROOT
        )
        release = REPO_ROOT / "target" / "release"
        for name in ("libquasi2d_py.so", "libquasi2d_py.dylib", "quasi2d_py.dll"):
            built = release / name
            if built.exists():
                break
        else:
            raise FileNotFoundError(f"cargo did not produce an extension library in {release}")
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, dest)


setup(
    name="quasi2d-py",
    version="0.1.0",
    description="Python bindings for the quasi2d operator laboratory",
    ext_modules=[Extension("quasi2d_py", sources=[])],
    cmdclass={"build_ext": CargoBuildExt},
    zip_safe=False,
)
