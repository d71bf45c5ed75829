"""File access for catalogs, schedules, scenarios and run outputs.

Readers and writers return ``None``/``False`` on I/O failure after logging the cause;
callers turn that into a domain error naming the path.
"""
import os
import json
import logging
from typing import Optional, Dict, Any, List
import pandas as pd

logger = logging.getLogger(__name__)

class FileHandler:

    @staticmethod
    def read_text_file(file_path: str) -> str:
        # utf-8-sig drops the BOM some exported cycle files carry
        try:
            with open(file_path, 'r', encoding='utf-8-sig') as file:
                return file.read()
        except UnicodeDecodeError:
            with open(file_path, 'r', encoding='latin-1') as file:
                return file.read()

    @staticmethod
    def read_json_file(file_path: str) -> Optional[Dict[str, Any]]:
        try:
            with open(file_path, 'r', encoding='utf-8') as file:
                return json.load(file)
        except Exception as e:
            logger.error("Error reading JSON file %s: %s", file_path, e)
            return None

    @staticmethod
    def write_json_file(file_path: str, data: Dict[str, Any]) -> bool:
        try:
            FileHandler._ensure_parent(file_path)
            with open(file_path, 'w', encoding='utf-8', newline='') as file:
                json.dump(data, file, indent=2, ensure_ascii=False)
                file.write('\n')
            return True
        except Exception as e:
            logger.error("Error writing JSON file %s: %s", file_path, e)
            return False

    @staticmethod
    def write_csv_file(file_path: str, frame: pd.DataFrame, float_format: str = '%.6f') -> bool:
        try:
            FileHandler._ensure_parent(file_path)
            frame.to_csv(file_path, index=False, float_format=float_format, lineterminator='\n')
            return True
        except Exception as e:
            logger.error("Error writing CSV file %s: %s", file_path, e)
            return False

    @staticmethod
    def validate_file_path(file_path: str, allowed_extensions: List[str] = None) -> bool:
        if not os.path.exists(file_path):
            return False

        if allowed_extensions:
            file_ext = os.path.splitext(file_path)[1].lower()
            return file_ext in allowed_extensions

        return True

    @staticmethod
    def _ensure_parent(file_path: str):
        parent = os.path.dirname(file_path)
        if parent:
            os.makedirs(parent, exist_ok=True)
