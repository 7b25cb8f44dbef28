#include "tinerf/encoding.hpp"

namespace tinerf {

void sh16(const double dir[3], double out[16]) {
  double x = dir[0], y = dir[1], z = dir[2];
  double xx = x * x, yy = y * y, zz = z * z;

  out[0] = 0.28209479177387814;

  out[1] = 0.4886025119029199 * y;
  out[2] = 0.4886025119029199 * z;
  out[3] = 0.4886025119029199 * x;

  out[4] = 1.0925484305920792 * x * y;
  out[5] = 1.0925484305920792 * y * z;
  out[6] = 0.31539156525252005 * (3.0 * zz - 1.0);
  out[7] = 1.0925484305920792 * x * z;
  out[8] = 0.5462742152960396 * (xx - yy);

  out[9] = 0.5900435899266435 * y * (3.0 * xx - yy);
  out[10] = 2.890611442640554 * x * y * z;
  out[11] = 0.4570457994644658 * y * (5.0 * zz - 1.0);
  out[12] = 0.3731763325901154 * z * (5.0 * zz - 3.0);
  out[13] = 0.4570457994644658 * x * (5.0 * zz - 1.0);
  out[14] = 1.445305721320277 * z * (xx - yy);
  out[15] = 0.5900435899266435 * x * (xx - 3.0 * yy);
}

}  // namespace tinerf
