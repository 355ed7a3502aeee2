import sys

import vpfplab.commands


def run():
    sys.exit(vpfplab.commands.main())


if __name__ == '__main__':
    run()
