package dctest;

public class Foo {
  public int foo(int i, int j) {
    while (true) {
      try {
        while (i < j) i = j++ / i;
        return j;
      } catch (RuntimeException re) {
        i = 10;
      }
    }
  }

  public int bar(int k) {
    switch (k) {
      case 0:
        return 1;
      case 1:
        return k + 2;
      case 2:
        return k * 3;
      default:
        return k - 1;
    }
  }

  public int count(int[] values) {
    int total = 0;
    for (int v : values) {
      total += v;
    }
    return total;
  }
}
