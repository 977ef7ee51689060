#!/usr/bin/env python3
"""
Tetrablock Verifier Setup Script
Installs dependencies, writes a .env file and runs a smoke check
"""

import sys
import subprocess
from pathlib import Path

ENV_DEFAULTS = {
    "DATABASE_URL": "sqlite:///./data/processed/verification.db",
    "OUTPUT_DIR": "data/processed",
    "TETRA_SEED": "0",
    "LOG_LEVEL": "INFO",
    "API_HOST": "0.0.0.0",
    "API_PORT": "8000",
}

SMOKE_STEPS = [
    (["-m", "app.cli", "member", "--domain", "tetrablock", "0", "0", "0"], "Checking membership of the origin"),
    (["-m", "app.cli", "verify", "--suite", "equality", "--n", "5", "--seed", "7", "--no-progress"],
     "Running a short equality suite"),
]


def run_python(args, description):
    """Run the current interpreter with args; True on exit code 0"""
    print(f"📦 {description}...")
    result = subprocess.run([sys.executable, *args], capture_output=True, text=True)
    if result.returncode != 0:
        print(f"❌ {description} failed (exit {result.returncode})")
        print(result.stderr.strip())
        return False
    print(f"✅ {description}")
    return True


def write_env(path=Path(".env")):
    """Write the default settings unless a .env already exists"""
    if path.exists():
        print("✅ Environment file already exists")
        return
    path.write_text("".join(f"{key}={value}\n" for key, value in ENV_DEFAULTS.items()))
    print(f"📝 Wrote {path} with default settings")


def main():
    print("🔷 Tetrablock Verifier Setup")
    print("=" * 50)

    if sys.version_info < (3, 11):
        print("❌ Python 3.11+ is required")
        sys.exit(1)

    if not run_python(["-m", "pip", "install", "-r", "requirements.txt"], "Installing dependencies"):
        sys.exit(1)

    write_env()

    if not all(run_python(args, description) for args, description in SMOKE_STEPS):
        print("❌ Smoke check failed")
        sys.exit(1)

    print("\n🎉 Setup completed successfully!")
    print("\n📋 Next steps:")
    print("1. Start the API server: python scripts/run_server.py")
    print("2. Open browser to: http://localhost:8000/docs")
    print("3. Run all suites: python scripts/run_verification.py")
    print("4. Run tests: pytest")

if __name__ == "__main__":
    main()
