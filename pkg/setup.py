"""
Setup file for spiralscan
"""
from setuptools import setup

# Use the Readme file as long description.
try:
    with open("Readme.md", "r") as f:
        long_description = f.read()
except FileNotFoundError:
    long_description = ""


def get_version():
    from pathlib import Path
    version_path = Path(__file__).parent / "VERSION"
    with version_path.open() as version_file:
        return version_file.read().strip()


# perform the actual install operation
setup(name="spiralscan",
      version=get_version(),
      author="spiralscan developers",
      long_description=long_description,
      long_description_content_type='text/markdown',
      packages=["spiralscan"],
      python_requires=">=3.8",

      install_requires=[
          "numpy",
          "scipy",
          "pandas",
          "jsonschema",
          "xarray",
          "PyYAML",
          "h5py",
          "h5netcdf",
          "hdf5plugin",
      ],
      entry_points={
          "console_scripts": [
              "spiralscan=spiralscan.cli:main",
          ],
      },
      )
