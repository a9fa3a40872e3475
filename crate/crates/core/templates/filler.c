fedata_sink = ({{var}} = {{var}} * {{mul}}u + {{add}}u);
