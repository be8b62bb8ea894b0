"""
Enables running the package as a module (python -m grouppld).
"""

from grouppld.cli.main import main

if __name__ == "__main__":
    main()
