import functools
import time

from app.config import config
from app.logger import logger
from app.utils.caching_util import CachingUtil


def try_catch_decorator(func):
    """Log and swallow a failure so that one bad sweep point does not abort the sweep."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except Exception as e:
            logger.error(f"Error in {func.__name__}: {e}")
            return None

    return wrapper


def _key_part(arg) -> str:
    if hasattr(arg, "cache_key"):
        return arg.cache_key()
    return str(arg)


def cached_data(cache_key_prefix: str, extension: str = "json", expiry_days: int = None):
    """
    Cache the return value of a service method on disk.

    :param cache_key_prefix: prefix of the cache key (e.g. 'oracle')
    :param extension: cache file format ('json' or 'txt')
    :param expiry_days: overrides CACHE_EXPIRY_DAYS when given

    Arguments after ``self`` contribute to the key; objects exposing
    ``cache_key()`` (run-configuration models) contribute their digest.
    Caching is a no-op unless LORENTZ_LAB_CACHE is enabled.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            if not config.CACHE_ENABLED:
                return func(*args, **kwargs)

            suffix = "_".join(_key_part(arg) for arg in args[1:])
            cache_key = f"{cache_key_prefix}_{suffix}" if suffix else cache_key_prefix

            service = CachingUtil(expiry_days=expiry_days)
            data = service.get(cache_key, extension)
            if data is not None:
                logger.info(f"Cache hit: {cache_key}")
                return data

            logger.info(f"Cache miss: {cache_key}. Computing...")
            result = func(*args, **kwargs)
            if result:
                service.set(cache_key, extension, result)
            return result

        return wrapper

    return decorator


def log_execution_time(func):
    """Log wall-clock time of a service step."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        logger.info(f"Starting execution of {func.__name__}")
        result = func(*args, **kwargs)
        elapsed_time = time.perf_counter() - start_time
        logger.info(f"Finished execution of {func.__name__}")
        logger.info(f"Execution time of {func.__name__}: {elapsed_time:.4f} seconds")
        return result

    return wrapper
