# main.py

from src.cli import run_main


def main():
    run_main()


if __name__ == "__main__":
    main()
