import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))


def main():
    from cli.app import main as cli_main
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
