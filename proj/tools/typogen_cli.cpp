// Placeholder main; replaced once the pipeline stages exist.
int main() { return 0; }
