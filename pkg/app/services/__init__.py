# 服务模块
# 命令分派与结果输出
