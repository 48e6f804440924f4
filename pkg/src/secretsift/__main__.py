import sys

from secretsift.cli import main

sys.exit(main())
