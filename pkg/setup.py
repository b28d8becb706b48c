from setuptools import find_packages, setup

setup(
    name="anda_io",
    version="0.1.0",
    description="Encode, store and cost-model activations in the Anda variable-length grouped BFP format for weight-only-quantized LLM inference.",
    long_description="Check out the README for more information.",
    license="Apache 2.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    package_data={"anda_io": ["configs/*.json"]},
    include_package_data=True,
    python_requires=">=3.10",
    entry_points={
        "console_scripts": [
            "anda=anda_io.anda_cli:main",
            "anda_echo_oracle=anda_io.scripts.echo_oracle:main",
            "anda_inspect=anda_io.scripts.inspect_container:main",
        ],
    },
    install_requires=open("requirements.txt").read().splitlines(),
    extras_require={"test": ["pytest>=7"]},
)
