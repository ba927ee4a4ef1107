"""
Setup script for World Insight

For modern Python packaging, prefer pyproject.toml.
This file is kept for backward compatibility.
"""

from setuptools import setup, find_packages

setup(
    name="world-insight",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    package_data={"src.world_insight.config": ["*.yaml"]},
    python_requires=">=3.10",
)
