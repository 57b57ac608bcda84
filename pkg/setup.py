"""
PHC Facility Assignment - Setup Script
Installs Python dependencies, creates working directories and validates the shipped scenarios
"""

import glob
import os
import subprocess
import sys


def install_requirements():
    """Install required Python packages from requirements.txt"""
    print("📦 Installing requirements...")
    subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])


def setup_directories():
    """Create directories for datasets, models, logs and results"""
    print("📁 Creating directories...")
    for name in ("data", "models", "logs", os.getenv("PHC_OUTPUT_DIR", "results")):
        os.makedirs(name, exist_ok=True)


def validate_configs():
    """Load every scenario under configs/ so malformed files fail here"""
    print("🗂️  Validating scenario files...")
    from phc_hfa.experiments import load_scenario

    for path in sorted(glob.glob("configs/*.yaml")):
        scenario = load_scenario(path)
        print(f"✅ {path}: {scenario.name} ({len(scenario.facilities)} facilities, {scenario.replications} replications)")


def main():
    """Run all setup steps"""
    print("🏥 PHC Facility Assignment - Setup")
    print("=" * 50)

    try:
        install_requirements()
        setup_directories()
        validate_configs()

        print("\n✅ Setup completed successfully!")
        print("\n🚀 To run every experiment, run:")
        print("   python run_complete.py\n")
        print("📖 Single commands:")
        print("   python main.py --help\n")

    except Exception as e:
        print(f"\n❌ Setup failed: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
