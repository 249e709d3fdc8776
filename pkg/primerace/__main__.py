"""
Allow running primerace CLI via: python -m primerace
"""

from primerace.cli.main import main

if __name__ == '__main__':
    main()
