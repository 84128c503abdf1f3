// Fixed-capacity packet byte buffer: append, read, release.
#include <stddef.h>
#include <stdint.h>

uint8_t pkt_storage[64];
size_t pkt_used = 0;

int pktbuf_add(array_ptr(uint8_t) chunk acount(n), size_t n) _Checked {
  array_ptr(uint8_t) pool abounds(pkt_storage, pkt_storage + 64) = pkt_storage;
  if (pkt_used + n > 64) {
    return -1;
  }
  for (size_t i = 0; i < n; i = i + 1) {
    pool[pkt_used + i] = chunk[i];
  }
  pkt_used = pkt_used + n;
  return 0;
}

int pktbuf_byte_at(size_t index) _Checked {
  array_ptr(uint8_t) pool abounds(pkt_storage, pkt_storage + 64) = pkt_storage;
  if (index >= pkt_used) {
    return -1;
  }
  return pool[index];
}

void pktbuf_reset(void) _Checked {
  pkt_used = 0;
}

int pktbuf_checksum(void) _Checked {
  array_ptr(uint8_t) pool abounds(pkt_storage, pkt_storage + 64) = pkt_storage;
  int acc = 0;
  for (size_t i = 0; i < pkt_used; i = i + 1) {
    acc = (acc + pool[i]) & 255;
  }
  return acc;
}
