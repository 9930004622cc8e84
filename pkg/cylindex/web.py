"""JSON web surface for Cylindex using Flask.

Each route maps its query string onto the CLI subcommand of the same name,
so /api/kernel?m=2&t=1&eps2=1 returns exactly what `kernel --m 2 --t 1 --eps2 1` prints.
"""
from flask import Flask, jsonify, request

from .cli import EXIT_OK, EXIT_USAGE, run

app = Flask(__name__)

# query keys that are switches rather than valued flags
_SWITCHES = {"numeric"}


def _argv(command: str) -> list:
    argv = [command]
    for key, value in request.args.items():
        flag = "--" + key.replace("_", "-")
        if key in _SWITCHES:
            if value.lower() in ("1", "true", "yes", "on"):
                argv.append(flag)
            continue
        argv += [flag, value]
    # the web surface always speaks JSON
    return argv + ["--output", "json"]


def _respond(command: str):
    code, text = run(_argv(command))
    if code == EXIT_OK:
        return app.response_class(text, mimetype="application/json")
    status = 400 if code == EXIT_USAGE else 422
    message = text.split("\n", 1)[0].removeprefix("error: ")
    return jsonify({"error": message, "exit_code": code}), status


@app.route("/api/kernel")
def kernel():
    """Symbolic kernel, plus spectral reports with numeric=1."""
    return _respond("kernel")


@app.route("/api/index")
def index():
    return _respond("index")


@app.route("/api/model")
def model():
    return _respond("model")


@app.route("/api/spectrum")
def spectrum():
    return _respond("spectrum")


@app.route("/api/health")
def health():
    return jsonify({"status": "ok"})


def run_web(host="127.0.0.1", port=5050, debug=False):
    app.run(host=host, port=port, debug=debug)
