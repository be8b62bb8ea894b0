from setuptools import setup, find_packages

# Read the content of README.md
with open("README.md", encoding="utf-8") as f:
    long_description = f.read()

setup(
    name="grouppld",
    version="0.1.0",
    description="Group-level privacy accounting for DP-SGD with mixture-of-Gaussians privacy-loss distributions",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["grouppld", "grouppld.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Security",
    ],
    python_requires=">=3.10",
    install_requires=[
        "click>=8.2.0",
        "rich>=13.0.0",
        "tabulate>=0.9.0",
        "numpy>=1.24",
        "scipy>=1.10",
    ],
    extras_require={
        "test": ["pytest>=7.0", "hypothesis>=6.0"],
    },
    entry_points={
        "console_scripts": [
            "grouppld=grouppld.cli.main:main",
        ],
    },
)
