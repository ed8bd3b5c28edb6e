"""
Helpers for endpoints and for turning human-friendly addresses into key bytes.
"""
import ipaddress
import re

_MAC_RE = re.compile(r"^[0-9a-fA-F]{2}([:-][0-9a-fA-F]{2}){5}$")


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    """Splits ``host:port`` (or ``[v6]:port``) into its parts."""
    host, sep, port = endpoint.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"endpoint must be host:port, got {endpoint!r}")
    port_number = int(port)
    if not 0 <= port_number <= 65535:
        raise ValueError(f"port {port_number} outside 0..65535")
    return host.strip("[]"), port_number


def text_to_int(text: str) -> int:
    """Converts an address-like or numeric string to an integer.

    Accepts dotted-quad IPv4, IPv6, MAC addresses, ``0x`` hex and decimal.
    """
    text = text.strip()
    if _MAC_RE.match(text):
        return int(re.sub(r"[:-]", "", text), 16)
    try:
        return int(ipaddress.ip_address(text))
    except ValueError:
        pass
    try:
        return int(text, 0)
    except ValueError:
        raise ValueError(f"cannot interpret {text!r} as a number or address") from None


def split_prefix(text: str) -> tuple[int, int]:
    """Parses ``addr/len`` into (address as int, prefix length)."""
    address, sep, length = text.partition("/")
    if not sep or not length.isdigit():
        raise ValueError(f"expected address/prefix_len, got {text!r}")
    return text_to_int(address), int(length)
