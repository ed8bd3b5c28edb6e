"""
Tệp cấu hình trung tâm cho bộ điều khiển runtime.

Tải các biến môi trường từ tệp .env và định nghĩa các giá trị mặc định cho target,
thư viện controller và benchmark. Các tham số dòng lệnh sẽ ghi đè các giá trị này.
"""
import os
from dotenv import load_dotenv

load_dotenv()

# pylint: disable=too-few-public-methods
class Config:
    """
    Lớp cấu hình chứa tất cả các cài đặt và hằng số dùng chung.
    """
    # Target Settings
    TARGET_LISTEN = os.getenv('TARGET_LISTEN', '127.0.0.1:9559')
    TARGET_SCHEMA_PATH = os.getenv('TARGET_SCHEMA_PATH', 'schemas/firewall.json')
    TARGET_RESPONSE_DELAY_MS = float(os.getenv('TARGET_RESPONSE_DELAY_MS', '0'))
    # Upper bound for a single frame's payload; larger headers close the session
    TARGET_MAX_FRAME_BYTES = int(os.getenv('TARGET_MAX_FRAME_BYTES', str(256 * 1024 * 1024)))
    # Queued frames after which further notifications to a slow session are dropped
    TARGET_NOTIFY_BACKLOG = int(os.getenv('TARGET_NOTIFY_BACKLOG', '10000'))

    # Controller Settings
    CLIENT_NAME = os.getenv('CLIENT_NAME', 'controller')
    CLIENT_CONNECT_TIMEOUT = float(os.getenv('CLIENT_CONNECT_TIMEOUT', '5.0'))

    # Benchmark Settings
    BENCH_OUT_DIR = os.getenv('BENCH_OUT_DIR', './bench_out')
    BENCH_RESULTS_DB = os.getenv('BENCH_RESULTS_DB', './bench_out/results.db')
    BENCH_TABLE = os.getenv('BENCH_TABLE', 'firewall_entries')
    BENCH_ENTRIES = int(os.getenv('BENCH_ENTRIES', '30000'))
    BENCH_BATCH_SIZES = [
        int(x.strip())
        for x in os.getenv(
            'BENCH_BATCH_SIZES', '1,3,10,30,100,300,1000,3000,10000,30000'
        ).split(',')
        if x.strip()
    ]
    BENCH_RUNS = int(os.getenv('BENCH_RUNS', '100'))
    BENCH_SIGNIFICANCE = float(os.getenv('BENCH_SIGNIFICANCE', '0.01'))

    # Logging Settings
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()
    # An empty LOG_FILE disables the rotating file handler
    LOG_FILE = os.getenv('LOG_FILE', 'runtime.log')

    PROJECT_NAME = 'mat-runtime'
    PROJECT_VERSION = '1.0.0'

# Create a singleton instance of the config
Config = Config()
