"""係数表（a_n、Phi_N、H_D）のディスクキャッシュ。"""
