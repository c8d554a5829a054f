from setuptools import setup, find_packages

setup(
    name="pagerank_discrepancy",
    version="0.1",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    py_modules=["config", "main"],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "networkx>=2.8",
        "numba>=0.56",
    ],
    entry_points={
        "console_scripts": [
            "pagerank-discrepancy=ui.cli:main",
        ],
    },
)
