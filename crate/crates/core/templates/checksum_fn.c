static int fedata_checksum(const unsigned char *a, int len)
{
    unsigned long sum = 0;
    int i = 0;
    if (len != {{len}}) {
        return 0;
    }
    while (i < len) {
        sum = sum + a[i];
        i++;
    }
    if (sum % {{mod}}ul != {{res}}ul) {
        return 0;
    }
    return 1;
}
