import math
import os
from enum import Enum

from jinja2 import Environment, FileSystemLoader, StrictUndefined, Template, TemplateNotFound


class ReportTemplate(Enum):
    CONSTANTS_SUMMARY = "constants_summary"
    VERIFY_SUMMARY = "verify_summary"


def format_value(value, spec: str = ".6g") -> str:
    """Extended-real formatting: +inf prints as 'inf', NaN as 'nan'."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, spec)


def format_grid(provenance: dict) -> str:
    return f"({provenance['t_min']}, {provenance['t_max']}], N={provenance['N']}"


class TemplateLoader:
    """Renders the markdown run summaries from app/templates."""

    def __init__(self, template_dir: str = None):
        if template_dir is None:
            current_dir = os.path.dirname(os.path.abspath(__file__))
            template_dir = os.path.join(current_dir, "..", "templates")
        self.template_dir = template_dir
        self.env = Environment(
            loader=FileSystemLoader(template_dir),
            undefined=StrictUndefined,
            keep_trailing_newline=True,
            autoescape=False,
        )
        self.env.filters["value"] = format_value
        self.env.filters["grid"] = format_grid

    def load_template(self, template: ReportTemplate) -> Template:
        """
        Load a report template.

        Raises:
            FileNotFoundError: If the template file does not exist.
        """
        template_file = f"{template.value}.j2"
        try:
            return self.env.get_template(template_file)
        except TemplateNotFound:
            raise FileNotFoundError(f"Template file '{template_file}' not found in '{self.template_dir}'")

    def apply_template(self, template: ReportTemplate, **kwargs) -> str:
        """Render ``template`` with the given report data (e.g. reports=[...])."""
        loaded = self.load_template(template)
        try:
            return loaded.render(**kwargs)
        except Exception as e:
            raise RuntimeError(f"Error rendering template '{template.value}': {e}")
