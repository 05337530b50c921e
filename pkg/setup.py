import setuptools

long_description = """
Light-node block verification and data availability, simulated.

Every block is committed with a coded Merkle tree. A light node samples a
small subtree, decodes it together with its neighbors, validates one
section of the block's transactions, and rejects the block on a fraud
proof or a stalled layer. The package models the whole round on a seeded
discrete-event network and measures it against closed-form bounds.

## Installation

```python
python -m pip install .
```

## Simple Usage

```
cover bounds --scenario theorem-valid
cover run --scenario smoke --out results/smoke
```
"""

setuptools.setup(
    name="cover",
    version="0.1.0",
    description="Collaborative light-node block verification with coded Merkle trees.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    package_dir={"": "src"},
    packages=setuptools.find_packages(where="src"),
    install_requires=[
        "numpy>=1.21",
        "networkx>=2.6",
        "simpy>=4.0",
        "cryptography>=3.4",
    ],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["cover=cover.__main__:main"]},
    python_requires=">=3.8",
)
