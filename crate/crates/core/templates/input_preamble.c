#define FEDATA_INPUT_LEN {{buflen}}
static unsigned char fedata_input[FEDATA_INPUT_LEN + 1];
static volatile unsigned int fedata_sink;

static void fedata_read_input(void)
{
    memset(fedata_input, 0, sizeof(fedata_input));
    if (fread(fedata_input, 1, FEDATA_INPUT_LEN, stdin) == 0) {
        fedata_sink = 0u;
    }
}
