from sglr_toolkit.app.utils.logger import log
