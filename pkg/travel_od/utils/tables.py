# Standard imports
import hashlib
import os

import pandas as pd

from travel_od.utils.errors import PanelSchemaError

# Same line endings and float rendering everywhere so reruns are byte-identical
CSV_OPTIONS = {'index': False, 'lineterminator': '\n'}


def write_table(frame, path, columns = None):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok = True)

    if columns is not None:
        frame = frame.loc[:, columns]

    frame.to_csv(path, **CSV_OPTIONS)
    return path


def read_table(path, required_columns, dtype = None, error = PanelSchemaError):
    try:
        frame = pd.read_csv(path, dtype = dtype, keep_default_na = True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise error("Could not read {}: {}".format(path, exc)) from exc

    missing = [column for column in required_columns if column not in frame.columns]
    if len(missing) > 0:
        raise error("{} is missing columns {}".format(path, missing))

    return frame


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as file:
        for block in iter(lambda: file.read(1 << 16), b''):
            digest.update(block)

    return digest.hexdigest()
